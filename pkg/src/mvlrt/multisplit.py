"""Repeated-split testing for designs where the likelihood ratio is undefined.

When n < p + m the full-data test does not exist, so each round randomly
splits the sample, screens predictors (and optionally PCA-reduces responses)
on one part, and runs the combined test t3 on the other. The J per-split
p-values are aggregated through an adaptive quantile with a correction
factor, giving a single p_t whose level is controlled for any J.

Split j is driven entirely by a seed derived from (config seed, j), so runs
are bit-reproducible and splits can execute in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SplitInfeasibleError
from .lrt import t3_test
from .model import RANK_TOL, DataSet, HypothesisMatrix, hypothesis_ss
from .rng import derive_seed, stream
from .screening import conditional_transform, parallel_analysis, pca_reduce, screen

GAMMA_MIN_FLOOR = 1e-4


@dataclass(frozen=True)
class MultiSplitConfig:
    """Knobs for the repeated-split procedure.

    ``pca_policy`` selects response reduction: None leaves Y alone,
    "parallel_analysis" picks the rank from permuted-data eigenvalues per
    split, and a positive integer fixes the rank. ``gamma_min`` defaults to
    0.5 / j_splits (slightly below 1/J) floored at 1e-4.
    """

    j_splits: int = 200
    gamma_min: float = None
    delta: float = 0.2
    split_ratio: float = 0.3
    seed: int = 0
    pca_policy: object = None
    f_rule: object = None

    def __post_init__(self):
        if self.j_splits < 1:
            raise DomainError(f"j_splits must be >= 1, got {self.j_splits}")
        if self.gamma_min is not None and not 0.0 < self.gamma_min < 1.0:
            raise DomainError(f"gamma_min must lie in (0, 1), got {self.gamma_min!r}")
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta!r}")
        if not 0.0 < self.split_ratio < 1.0:
            raise DomainError(f"split_ratio must lie in (0, 1), got {self.split_ratio!r}")
        pol = self.pca_policy
        if pol is None or pol == "parallel_analysis":
            return
        if isinstance(pol, bool) or not isinstance(pol, int) or pol < 1:
            raise DomainError(f"pca_policy must be None, 'parallel_analysis' or a rank >= 1, got {pol!r}")

    @property
    def resolved_gamma_min(self) -> float:
        if self.gamma_min is not None:
            return self.gamma_min
        return max(0.5 / self.j_splits, GAMMA_MIN_FLOOR)


@dataclass(frozen=True)
class SplitOutcome:
    """One split's p-value plus what the reduction kept."""

    p_value: float
    selected: tuple
    m0: int
    split_seed: int

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p_value {self.p_value!r} outside [0, 1]")


def split_indices(rng, n: int, ratio: float):
    """Uniformly random partition into screening and testing index sets.

    Returns sorted arrays (S, T) with |S| = round(ratio * n).
    """
    if n < 4:
        raise DomainError(f"need n >= 4 to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise DomainError(f"ratio must lie in (0, 1), got {ratio!r}")
    n_s = int(round(ratio * n))
    if n_s < 1 or n - n_s < 1:
        raise DomainError(f"split sizes {n_s} and {n - n_s} are degenerate")
    perm = rng.permutation(n)
    return np.sort(perm[:n_s]), np.sort(perm[n_s:])


def _row_space_basis(c_m: np.ndarray):
    """Orthonormal-row representative of the row space of c_m, or None if trivial.

    Restricting C to the screened columns can leave redundant or even zero
    rows; the test only depends on the row space, so a full-row-rank basis is
    substituted before fitting.
    """
    if c_m.size == 0:
        return None
    _, sv, vt = np.linalg.svd(c_m)
    if sv.size == 0 or sv[0] <= 0.0:
        return None
    r_eff = int(np.count_nonzero(sv > RANK_TOL * sv[0]))
    if r_eff == 0:
        return None
    return vt[:r_eff]


def _reduce_and_test(X, Y, c_rows, protect, cfg, rng, n_s_idx, n_t_idx, label):
    """Shared screening + testing half of the split and no-split paths."""
    X_s, Y_s = X[n_s_idx], Y[n_s_idx]
    X_t, Y_t = X[n_t_idx], Y[n_t_idx]
    n_t = len(n_t_idx)
    p = X.shape[1]
    m = Y.shape[1]
    budget = max(int(math.floor(cfg.delta * p + 1e-9)), protect)

    reduction = None
    m_eff = m
    if cfg.pca_policy is not None:
        cap = min(n_t - budget - 2, len(n_s_idx) - 1, m)
        if cap < 1:
            raise SplitInfeasibleError(
                f"{label}: no room for responses with n_T={n_t}, p0={budget}, m={m}")
        if cfg.pca_policy == "parallel_analysis":
            m_eff = parallel_analysis(rng, Y_s, cap=cap)
        else:
            m_eff = int(cfg.pca_policy)
            if m_eff > cap:
                raise SplitInfeasibleError(
                    f"{label}: fixed m0={m_eff} exceeds the feasible cap {cap}")
        reduction = pca_reduce(Y_s, m_eff)
        Y_s = reduction.transform(Y_s)

    result = screen(X_s, Y_s, cfg.delta, protect=protect)
    cols = np.sort(np.asarray(result.selected, dtype=int))
    p0 = cols.size
    if n_t <= p0 + m_eff + 1:
        raise SplitInfeasibleError(
            f"{label}: testing half has n_T={n_t} but needs more than p0 + m0 + 1 = {p0 + m_eff + 1}")

    c_eff = _row_space_basis(c_rows[:, cols])
    if c_eff is None:
        # screening removed every hypothesis column: nothing to test, stay conservative
        return 1.0, cols, m_eff
    if reduction is not None:
        Y_t = reduction.transform(Y_t)
    ss = hypothesis_ss(DataSet(X_t[:, cols], Y_t), c_eff)
    report = t3_test(ss, f_rule=cfg.f_rule)
    return report.p_value, cols, m_eff


def _prepare_hypothesis(data: DataSet, C):
    hyp = C if isinstance(C, HypothesisMatrix) else HypothesisMatrix(C)
    if hyp.p != data.p:
        raise DomainError(f"C has p={hyp.p} columns but the design has p={data.p}")
    if hyp.is_leading_identity():
        return data.X, hyp.C, 0
    X, record = conditional_transform(data.X, hyp)
    c_rows = np.zeros((hyp.r, hyp.p))
    c_rows[:, :hyp.r] = np.eye(hyp.r)
    return X, c_rows, record.r


def per_split_pvalue(data: DataSet, C, cfg: MultiSplitConfig, j: int) -> SplitOutcome:
    """Run split j end to end: split, reduce, test on the held-out part.

    A hypothesis not already in leading-identity form is first rotated by
    conditional_transform and its r transformed predictors are protected from
    screening. After screening, the hypothesis restricted to the selected
    columns is row-reduced to full rank; if the restriction is empty the
    split returns p = 1.
    """
    X, c_rows, protect = _prepare_hypothesis(data, C)
    split_seed = derive_seed(cfg.seed, j)
    rng = stream(cfg.seed, j)
    s_idx, t_idx = split_indices(rng, data.n, cfg.split_ratio)
    p_val, cols, m_eff = _reduce_and_test(
        X, data.Y, c_rows, protect, cfg, rng, s_idx, t_idx, f"split {j}")
    return SplitOutcome(float(p_val), tuple(int(c) for c in cols), m_eff, split_seed)


def no_split_pvalue(data: DataSet, C, cfg: MultiSplitConfig) -> SplitOutcome:
    """Screen and test on the same data: the deliberately unsafe J = 0 mode.

    Selection and testing reuse the same observations, so the p-value is not
    valid; this exists as a negative control demonstrating why splitting is
    required. The command-line front end refuses it without an override.
    """
    X, c_rows, protect = _prepare_hypothesis(data, C)
    split_seed = derive_seed(cfg.seed, -1)
    rng = stream(cfg.seed, -1)
    idx = np.arange(data.n)
    p_val, cols, m_eff = _reduce_and_test(
        X, data.Y, c_rows, protect, cfg, rng, idx, idx, "no-split run")
    return SplitOutcome(float(p_val), tuple(int(c) for c in cols), m_eff, split_seed)


def q_gamma(pvals, gamma: float) -> float:
    """Empirical gamma-quantile of the scaled p-values, capped at 1.

    Uses the ceil(gamma * J)-th order statistic of {p_j / gamma}.
    """
    pv = np.asarray(pvals, dtype=float)
    if pv.size == 0:
        raise DomainError("q_gamma needs at least one p-value")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma!r}")
    if np.any(~np.isfinite(pv)) or pv.min() < 0.0 or pv.max() > 1.0:
        raise DomainError("p-values must lie in [0, 1]")
    # the tiny slack keeps ceil() exact when gamma * J is an integer in real arithmetic
    k = min(pv.size, max(1, math.ceil(gamma * pv.size - 1e-9)))
    q = np.sort(pv)[k - 1] / gamma
    return float(min(1.0, q))


def adaptive_pt(pvals, gamma_min: float) -> float:
    """Aggregate split p-values: the corrected infimum of Q over (gamma_min, 1).

    Q(gamma) is a step function whose infimum over each interval
    ((k-1)/J, k/J] is attained at the right end with value J p_(k) / k, and
    the last interval contributes its limit p_(J); the infimum over the whole
    range is therefore an exact finite minimum. The (1 - log gamma_min)
    factor pays for optimizing over gamma.
    """
    pv = np.asarray(pvals, dtype=float)
    if pv.size == 0:
        raise DomainError("adaptive_pt needs at least one p-value")
    if not 0.0 < gamma_min < 1.0:
        raise DomainError(f"gamma_min must lie in (0, 1), got {gamma_min!r}")
    if np.any(~np.isfinite(pv)) or pv.min() < 0.0 or pv.max() > 1.0:
        raise DomainError("p-values must lie in [0, 1]")
    j = pv.size
    pv = np.sort(pv)
    best = pv[-1]
    ks = np.arange(1, j, dtype=float)
    live = ks / j > gamma_min
    if live.any():
        best = min(best, float((j * pv[:-1][live] / ks[live]).min()))
    inf_q = min(1.0, best)
    return float(min(1.0, (1.0 - math.log(gamma_min)) * inf_q))


@dataclass(frozen=True)
class MultiSplitResult:
    """Aggregated outcome plus the per-split audit trail."""

    p_t: float
    alpha: float
    reject: bool
    gamma_min: float
    outcomes: tuple

    def csv_header(self) -> list:
        return ["j", "split_seed", "p_value", "m0", "n_selected"]

    def csv_rows(self) -> list:
        return [[j, o.split_seed, repr(o.p_value), o.m0, len(o.selected)]
                for j, o in enumerate(self.outcomes)]

    def summary_text(self) -> str:
        lines = [f"p_t={self.p_t!r}",
                 f"alpha={self.alpha!r}",
                 f"reject={int(self.reject)}",
                 f"gamma_min={self.gamma_min!r}",
                 f"j_splits={len(self.outcomes)}"]
        return "\n".join(lines)


def multisplit_test(data: DataSet, C, cfg: MultiSplitConfig,
                    alpha: float = 0.05, threads: int = 1) -> MultiSplitResult:
    """The full procedure: J splits, per-split p-values, adaptive aggregation.

    Split jobs are independent and may run on a thread pool; results are
    collected by split index, so the outcome does not depend on thread count.
    An infeasible split raises SplitInfeasibleError naming the split and the
    offending sizes rather than silently skipping it.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    jobs = range(cfg.j_splits)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda j: per_split_pvalue(data, C, cfg, j), jobs))
    else:
        outcomes = [per_split_pvalue(data, C, cfg, j) for j in jobs]
    p_t = adaptive_pt([o.p_value for o in outcomes], cfg.resolved_gamma_min)
    return MultiSplitResult(p_t, alpha, p_t <= alpha, cfg.resolved_gamma_min, tuple(outcomes))
