"""Hypothesis tests for C B = 0 and their reference distributions.

Five tests share the sums-of-squares pair: the classical chi-square
approximation of -2 log L_n, its Bartlett correction, the dimension-corrected
normal statistic t1, the largest-root statistic t2 referred to a Tracy-Widom
law, and the combination t3 = t1 + t2 * 1{t2 >= F_n}. All p-values are
one-sided upper tails: every test here rejects for large statistics.

boundary_check quantifies how far a dimension quadruple sits from the regime
where the plain chi-square (or Bartlett-corrected) approximation is trusted.
theoretical_power predicts the t1 power under proportional-growth asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distributions import (
    chi_sq_tail,
    std_normal_tail,
    std_normal_upper_quantile,
    tw1_cdf,
)
from .errors import DegenerateRootError, DomainError, RegimeError
from .model import Dims, SumsOfSquares, neg2_log_lrt, theta_max


@dataclass
class TestReport:
    """Outcome of a single test: method tag, statistic, p-value, diagnostics."""

    method: str
    statistic: float
    p_value: float
    diagnostics: dict = field(default_factory=dict)

    METHODS = ("chi2", "bartlett", "t1", "t2", "t3")

    def __post_init__(self):
        if self.method not in self.METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")
        if not (0.0 <= self.p_value <= 1.0):
            raise DomainError(f"p_value {self.p_value!r} outside [0,1]")
        if not math.isfinite(self.statistic):
            raise DomainError("statistic must be finite")
        for k, v in self.diagnostics.items():
            if not math.isfinite(v):
                raise DomainError(f"diagnostic {k}={v!r} is not finite")

    def _items(self):
        yield "method", self.method
        yield "statistic", self.statistic
        yield "p_value", self.p_value
        for k in sorted(self.diagnostics):
            yield k, self.diagnostics[k]

    def key_value_text(self) -> str:
        """Flat key=value block, one pair per line."""
        return "\n".join(f"{k}={v!r}" if not isinstance(v, str) else f"{k}={v}"
                         for k, v in self._items())

    def csv_header(self) -> list:
        return [k for k, _ in self._items()]

    def csv_row(self) -> list:
        return [v if isinstance(v, str) else repr(v) for _, v in self._items()]


@dataclass(frozen=True)
class BoundaryDiag:
    """Distance-from-validity metrics for the chi-square approximations."""

    chi2_metric: float
    bartlett_metric: float
    lrt_defined: bool

    @staticmethod
    def verdict(metric: float) -> str:
        """Heuristic reading of a metric: safe below 0.1, marginal below 0.5."""
        if metric <= 0.1:
            return "safe"
        if metric <= 0.5:
            return "marginal"
        return "unsafe"


@dataclass(frozen=True)
class PowerSpec:
    """Inputs of the asymptotic power prediction for t1.

    deltas are the fixed nonzero eigenvalues of the per-sample noncentrality;
    rho_p, rho_r, rho_m are the limits of p/n, r/n, m/n.
    """

    deltas: tuple
    rho_p: float
    rho_r: float
    rho_m: float
    alpha: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        for d in self.deltas:
            if not (d > 0.0 and math.isfinite(d)):
                raise DomainError(f"deltas must be positive finite, got {d!r}")
        for name in ("rho_p", "rho_r", "rho_m"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise DomainError(f"{name} must lie in (0,1), got {v!r}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha!r}")


def mu_sigma(dims: Dims):
    """Centering and scaling of the corrected statistic: returns (mu_n, n*sigma_n).

    sigma_n^2 = (2/n^2) * n^2 log-ratio form; concretely
    sigma^2 = 2 log[ (n+r-p-m)(n-p) / ((n-p-m)(n+r-p)) ], and
    mu_n = n (n-m-p-1/2) log(ratio) + n r log[(n+r-p-m)/(n+r-p)]
         + n m log[(n-p)/(n+r-p)].
    The limits in the classical regime are mu_n -> -mr and (n sigma_n)^2 -> 2mr.
    """
    n, p, m, r = dims.n, dims.p, dims.m, dims.r
    if not dims.lrt_defined:
        raise RegimeError(f"mu_sigma needs n > p + m, got {dims}")
    if p < r:
        raise RegimeError(f"mu_sigma needs p >= r, got {dims}")
    if n + r - p - m <= 0:
        raise RegimeError(f"mu_sigma needs n + r - p - m > 0, got {dims}")
    a = n + r - p - m
    b = n - p
    c = n - p - m
    d = n + r - p
    log_ratio = math.log(a) + math.log(b) - math.log(c) - math.log(d)
    sigma_sq = 2.0 * log_ratio
    mu = (
        n * (n - m - p - 0.5) * log_ratio
        + n * r * (math.log(a) - math.log(d))
        + n * m * (math.log(b) - math.log(d))
    )
    return float(mu), float(n * math.sqrt(sigma_sq))


def t1_test(ss: SumsOfSquares) -> TestReport:
    """Dimension-corrected normal test: (-2 log L_n + mu_n) / (n sigma_n)."""
    mu, n_sigma = mu_sigma(ss.dims)
    neg2 = neg2_log_lrt(ss)
    stat = (neg2 + mu) / n_sigma
    return TestReport(
        method="t1",
        statistic=stat,
        p_value=std_normal_tail(stat),
        diagnostics={"mu_n": mu, "n_sigma_n": n_sigma, "neg2_log_lrt": neg2},
    )


def chi2_test(ss: SumsOfSquares) -> TestReport:
    """Classical approximation: -2 log L_n against chi-square with mr df."""
    neg2 = neg2_log_lrt(ss)
    df = ss.dims.m * ss.dims.r
    return TestReport(
        method="chi2",
        statistic=neg2,
        p_value=chi_sq_tail(neg2, df),
        diagnostics={"df": float(df)},
    )


def bartlett_rho(dims: Dims) -> float:
    """Bartlett correction factor 1 - (p - r/2 + m/2 + 1/2)/n."""
    return 1.0 - (dims.p - dims.r / 2.0 + dims.m / 2.0 + 0.5) / dims.n


def bartlett_test(ss: SumsOfSquares) -> TestReport:
    """Bartlett-corrected chi-square test: rho * (-2 log L_n) against chi2_mr."""
    rho = bartlett_rho(ss.dims)
    if rho <= 0.0:
        raise RegimeError(
            f"Bartlett correction factor rho={rho:.4g} <= 0 at {ss.dims}; "
            "the correction is meaningless here"
        )
    neg2 = neg2_log_lrt(ss)
    df = ss.dims.m * ss.dims.r
    stat = rho * neg2
    return TestReport(
        method="bartlett",
        statistic=stat,
        p_value=chi_sq_tail(stat, df),
        diagnostics={"rho": rho, "df": float(df)},
    )


def chi2_bias(dims: Dims) -> float:
    """Leading bias of the plain chi-square approximation."""
    m, r = dims.m, dims.r
    return math.sqrt(m * r) * (dims.p + m / 2.0 - r / 2.0 + 0.5) / dims.n


def boundary_check(dims: Dims) -> BoundaryDiag:
    """Metrics that must vanish for the classical approximations to hold.

    chi2_metric = sqrt(mr) (p + m/2 - r/2) / n; the plain chi-square
    approximation is valid exactly when this tends to zero.
    bartlett_metric = sqrt(mr) (r^2 + m^2) / n^2, the analogue after Bartlett
    correction.
    """
    m, r, n, p = dims.m, dims.r, dims.n, dims.p
    root = math.sqrt(m * r)
    return BoundaryDiag(
        chi2_metric=root * (p + m / 2.0 - r / 2.0) / n,
        bartlett_metric=root * (r**2 + m**2) / n**2,
        lrt_defined=dims.lrt_defined,
    )


def t2_params(dims: Dims):
    """Centering and scaling (mu_tilde, sigma_tilde) of the largest-root logit."""
    n, p, m, r = dims.n, dims.p, dims.m, dims.r
    N = n - p + r - 1
    lo, hi = min(m, r), max(m, r)
    if N <= hi:
        raise RegimeError(f"t2 needs n - p + r - 1 > max(m, r), got N={N} at {dims}")
    arg_lo = (lo - 0.5) / N
    arg_hi = (hi - 0.5) / N
    if not (0.0 <= arg_lo <= 1.0 and 0.0 <= arg_hi <= 1.0):
        raise RegimeError(f"t2 angle arguments outside [0,1] at {dims}")
    gamma = 2.0 * math.asin(math.sqrt(arg_lo))
    phi = 2.0 * math.asin(math.sqrt(arg_hi))
    mu_t = 2.0 * math.log(math.tan((phi + gamma) / 2.0))
    sigma_cubed = 16.0 / (N * N * math.sin(phi + gamma) ** 2 * math.sin(phi) * math.sin(gamma))
    return mu_t, sigma_cubed ** (1.0 / 3.0)


def t2_test(ss: SumsOfSquares, convention: str = "johnstone") -> TestReport:
    """Largest-root test: standardized logit of theta against Tracy-Widom order 1."""
    mu_t, sigma_t = t2_params(ss.dims)
    theta = theta_max(ss, convention)
    if theta <= 0.0 or theta >= 1.0:
        raise DegenerateRootError(f"largest root theta={theta!r} has no logit")
    stat = (math.log(theta / (1.0 - theta)) - mu_t) / sigma_t
    return TestReport(
        method="t2",
        statistic=stat,
        p_value=1.0 - tw1_cdf(stat),
        diagnostics={"mu_tilde": mu_t, "sigma_tilde": sigma_t, "theta": theta},
    )


def default_f_rule(n: int) -> float:
    """Combination threshold F_n = max(log log n, 2)."""
    if n < 3:
        raise DomainError(f"F_n needs n >= 3, got {n}")
    return max(math.log(math.log(n)), 2.0)


def t3_test(ss: SumsOfSquares, f_rule=None, convention: str = "johnstone") -> TestReport:
    """Combined test t3 = t1 + t2 * 1{t2 >= F_n}, referred to the normal null.

    Under the null the indicator vanishes asymptotically, so the reference
    stays standard normal; the added term only fires on strong largest-root
    evidence.
    """
    rule = default_f_rule if f_rule is None else f_rule
    r1 = t1_test(ss)
    r2 = t2_test(ss, convention)
    f_n = float(rule(ss.dims.n))
    stat = r1.statistic + (r2.statistic if r2.statistic >= f_n else 0.0)
    return TestReport(
        method="t3",
        statistic=stat,
        p_value=std_normal_tail(stat),
        diagnostics={"t1": r1.statistic, "t2": r2.statistic, "f_n": f_n},
    )


def theoretical_power(spec: PowerSpec) -> float:
    """Predicted t1 power under proportional growth with fixed spike sizes.

    With shorthand g = 1 + rho_r - rho_p:
    W = sum_j log(1 + delta_j / g), sigma^2 = 2 log[(1 - rho_m/g)/(1 - rho_m/(1 - rho_p))],
    and the prediction is 1 - Phi(z_alpha - (2/sigma) W).
    """
    if spec.rho_p + spec.rho_m >= 1.0:
        raise RegimeError(
            f"power formula needs rho_p + rho_m < 1, got {spec.rho_p} + {spec.rho_m}"
        )
    g = 1.0 + spec.rho_r - spec.rho_p
    sigma_sq = 2.0 * math.log((1.0 - spec.rho_m / g) / (1.0 - spec.rho_m / (1.0 - spec.rho_p)))
    if sigma_sq <= 0.0:
        raise RegimeError(f"power formula variance is nonpositive ({sigma_sq:.4g})")
    w = sum(math.log1p(d / g) for d in spec.deltas)
    z = std_normal_upper_quantile(spec.alpha)
    return std_normal_tail(z - (2.0 / math.sqrt(sigma_sq)) * w)
