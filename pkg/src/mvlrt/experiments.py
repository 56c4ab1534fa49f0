"""Monte Carlo harness: calibration, power and multi-split rejection tables.

Every sweep walks a grid of experiment cells, estimates rejection frequencies
per requested method, and returns a ResultTable of rows
(cell, method, rate, mc_std_error, reps, runtime, status). Infeasible cells
produce a labeled row with no numbers instead of crashing the sweep.

Reproducibility contract: replicate k of cell c draws from a generator keyed
by (seed, c, k), and aggregation is integer counting, so a sweep rerun with a
different thread count produces byte-identical tables.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, MvlrtError, RegimeError
from .lrt import (
    PowerSpec,
    bartlett_test,
    chi2_test,
    t1_test,
    t2_test,
    t3_test,
    theoretical_power,
)
from .model import DataSet, Dims, HypothesisMatrix, SignalMatrix, canonical_form_sample, hypothesis_ss
from .multisplit import MultiSplitConfig, multisplit_test, no_split_pvalue
from .rng import derive_seed, stream

GENERATORS = ("canonical", "linear")
NOISE_KINDS = ("gaussian", "multinomial", "t3", "t5")
SIGNAL_KINDS = ("null", "spikes", "diagonal", "single", "dense")
_TESTS = {
    "chi2": chi2_test,
    "bartlett": bartlett_test,
    "t1": t1_test,
    "t2": t2_test,
    "t3": t3_test,
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep's worth of settings.

    ``signal`` is a tagged tuple: ("null",), ("spikes", ratios) for canonical
    designs where ratios fix the relative spike sizes, ("diagonal", r_k) for
    a diagonal coefficient matrix with r_k nonzero entries, ("single",) for a
    lone nonzero (1,1) coefficient, or ("dense",) for i.i.d. Gaussian
    coefficients. Strengths come from ``signal_grid``: tr(Omega)/m targets
    for spikes, coefficient sizes otherwise. ``eta_grid`` turns the dims in
    ``grow`` into floor(n ** eta) per cell. ``noise`` selects the robustness
    generators: "multinomial" thresholds X and Y to six levels, "t3"/"t5"
    draw the errors from a heavy-tailed t distribution.
    """

    generator: str = "canonical"
    n: int = 100
    p: int = 50
    m: int = 20
    r: int = 30
    eta_grid: tuple = ()
    grow: str = "pmr"
    signal: tuple = ("null",)
    signal_grid: tuple = ()
    rho_x: float = 0.0
    rho_e: float = 0.0
    noise: str = "gaussian"
    methods: tuple = ("t1",)
    reps: int = 10_000
    alpha: float = 0.05
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise DomainError(f"unknown generator {self.generator!r}")
        if self.noise not in NOISE_KINDS:
            raise DomainError(f"unknown noise kind {self.noise!r}")
        if self.noise != "gaussian" and self.generator != "linear":
            raise DomainError("non-Gaussian noise requires the linear generator")
        if not self.signal or self.signal[0] not in SIGNAL_KINDS:
            raise DomainError(f"unknown signal spec {self.signal!r}")
        for meth in self.methods:
            if meth not in _TESTS:
                raise DomainError(f"unknown method {meth!r}")
        if self.reps < 1:
            raise DomainError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha!r}")
        if self.threads < 1:
            raise DomainError(f"threads must be >= 1, got {self.threads}")
        for rho in (self.rho_x, self.rho_e):
            if not -1.0 < rho < 1.0:
                raise DomainError(f"AR(1) parameter must lie in (-1,1), got {rho!r}")
        for eta in self.eta_grid:
            if not 0.0 < eta < 1.0:
                raise DomainError(f"eta must lie in (0,1), got {eta!r}")
        if self.grow and any(ch not in "pmr" for ch in self.grow):
            raise DomainError(f"grow must name a subset of 'pmr', got {self.grow!r}")


@dataclass(frozen=True)
class ResultRow:
    cell: str
    method: str
    rate: float
    mc_std_error: float
    reps: int
    runtime_s: float
    status: str = "ok"


class ResultTable:
    """Ordered collection of sweep rows with CSV emission.

    Wall-clock runtimes stay on the row objects and out of the CSV: emitted
    tables must be byte-identical across reruns and thread counts, and timing
    is the one field that never is.
    """

    HEADER = ["cell", "method", "rate", "mc_std_error", "reps", "status"]

    def __init__(self, rows):
        self.rows = tuple(rows)
        for row in self.rows:
            if row.rate is not None and not 0.0 <= row.rate <= 1.0:
                raise DomainError(f"rate {row.rate!r} outside [0,1] in row {row.cell}")

    def csv_text(self) -> str:
        out = [",".join(self.HEADER)]
        for row in self.rows:
            rate = "" if row.rate is None else repr(row.rate)
            se = "" if row.mc_std_error is None else repr(row.mc_std_error)
            out.append(",".join([
                f"\"{row.cell}\"", row.method, rate, se, str(row.reps),
                "\"%s\"" % row.status.replace("\"", "'"),
            ]))
        return "\n".join(out) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.csv_text())

    def gnuplot_script(self, csv_path: str) -> str:
        """A plotting script for the emitted CSV: one curve per method."""
        methods = sorted({row.method for row in self.rows if row.rate is not None})
        lines = [
            "set datafile separator ','",
            f"csv = '{csv_path}'",
            "set key outside",
            "set ylabel 'rejection rate'",
            "set xlabel 'cell index'",
            "set yrange [0:1]",
            "plot \\",
        ]
        plots = [
            f"  \"< awk -F, 'NR>1 && $2==\\\"{meth}\\\"' \" . csv using 0:3 with linespoints title '{meth}'"
            for meth in methods
        ]
        lines.append(", \\\n".join(plots))
        return "\n".join(lines) + "\n"


def _ar1_factor(rho: float, k: int) -> np.ndarray:
    if rho == 0.0:
        return np.eye(k)
    idx = np.arange(k)
    sigma = rho ** np.abs(np.subtract.outer(idx, idx))
    return np.linalg.cholesky(sigma)


_SIX_LEVELS = np.array([-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])
_SIX_CUTS = np.array([-1.0, -0.4, 0.0, 0.4, 1.0])


def _six_level(z: np.ndarray) -> np.ndarray:
    """Threshold continuous entries to the six-level discrete scale."""
    return _SIX_LEVELS[np.searchsorted(_SIX_CUTS, z, side="right")]


def _build_b(rng, spec: ExperimentSpec, p: int, m: int, strength: float) -> np.ndarray:
    kind = spec.signal[0]
    b = np.zeros((p, m))
    if kind == "null" or strength == 0.0:
        return b
    if kind == "diagonal":
        r_k = int(spec.signal[1])
        if r_k > min(p, m):
            raise DomainError(f"diagonal signal rank {r_k} exceeds min(p,m)={min(p, m)}")
        b[np.arange(r_k), np.arange(r_k)] = strength
    elif kind == "single":
        b[0, 0] = strength
    elif kind == "dense":
        b = rng.standard_normal((p, m)) * strength
    else:
        raise DomainError(f"signal {kind!r} is not defined for the linear generator")
    return b


def gen_linear_model(rng, spec: ExperimentSpec, strength: float = 0.0) -> DataSet:
    """Draw one dataset Y = X B + E from an ExperimentSpec's generator settings."""
    n, p, m = spec.n, spec.p, spec.m
    if spec.noise == "multinomial":
        X = _six_level(rng.standard_normal((n, p)))
        b = _build_b(rng, spec, p, m, strength)
        W = X @ b + rng.standard_normal((n, m))
        return DataSet(X, _six_level(W))
    if spec.noise in ("t3", "t5"):
        X = rng.standard_normal((n, p))
        E = rng.standard_t(3 if spec.noise == "t3" else 5, size=(n, m))
    else:
        X = rng.standard_normal((n, p)) @ _ar1_factor(spec.rho_x, p).T
        E = rng.standard_normal((n, m)) @ _ar1_factor(spec.rho_e, m).T
    b = _build_b(rng, spec, p, m, strength)
    return DataSet(X, X @ b + E)


def _spike_signal(ratios, target: float, dims: Dims) -> SignalMatrix:
    """Diagonal spikes with relative sizes ``ratios`` scaled to tr(Omega)/m = target."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0 or np.any(ratios <= 0.0):
        raise DomainError("spike ratios must be positive")
    if target < 0.0:
        raise DomainError(f"tr(Omega)/m target must be >= 0, got {target!r}")
    scale = math.sqrt(target * dims.m / float(np.sum(ratios ** 2)))
    return SignalMatrix.diagonal_spikes(ratios * scale, dims)


def _grown_dims(spec: ExperimentSpec, eta: float) -> Dims:
    size = max(1, int(math.floor(spec.n ** eta)))
    return Dims(
        spec.n,
        size if "p" in spec.grow else spec.p,
        size if "m" in spec.grow else spec.m,
        size if "r" in spec.grow else spec.r,
    )


def _leading_identity(dims: Dims) -> HypothesisMatrix:
    return HypothesisMatrix(np.eye(dims.p)[: dims.r])


def _estimate_cell(spec: ExperimentSpec, cell_id: int, cell: str, methods,
                   draw_ss) -> list:
    """Count rejections of each method over spec.reps replicates of one cell.

    ``draw_ss(rng)`` produces the sums-of-squares sample. Methods that fail
    their regime preconditions on a probe sample are reported infeasible and
    excluded from the loop.
    """
    started = time.perf_counter()
    live = []
    rows = []
    try:
        probe = draw_ss(stream(spec.seed, cell_id, 0))
    except MvlrtError as exc:
        elapsed = time.perf_counter() - started
        return [ResultRow(cell, meth, None, None, spec.reps, elapsed,
                          f"infeasible: {exc}") for meth in methods]
    for meth in methods:
        try:
            _TESTS[meth](probe)
            live.append(meth)
        except MvlrtError as exc:
            rows.append(ResultRow(cell, meth, None, None, spec.reps,
                                  time.perf_counter() - started, f"infeasible: {exc}"))

    counts = {meth: 0 for meth in live}
    if live:
        def chunk_counts(bounds):
            lo, hi = bounds
            local = dict.fromkeys(live, 0)
            for rep in range(lo, hi):
                ss = draw_ss(stream(spec.seed, cell_id, rep))
                for meth in live:
                    if _TESTS[meth](ss).p_value <= spec.alpha:
                        local[meth] += 1
            return local

        edges = np.linspace(0, spec.reps, min(spec.threads, spec.reps) * 4 + 1).astype(int)
        chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if a < b]
        if spec.threads > 1:
            with ThreadPoolExecutor(max_workers=spec.threads) as pool:
                partials = list(pool.map(chunk_counts, chunks))
        else:
            partials = [chunk_counts(c) for c in chunks]
        for part in partials:
            for meth in live:
                counts[meth] += part[meth]

    elapsed = time.perf_counter() - started
    for meth in live:
        rate = counts[meth] / spec.reps
        se = math.sqrt(rate * (1.0 - rate) / spec.reps)
        rows.append(ResultRow(cell, meth, rate, se, spec.reps, elapsed))
    order = {meth: k for k, meth in enumerate(methods)}
    rows.sort(key=lambda row: order[row.method])
    return rows


def _null_cells(spec: ExperimentSpec):
    if spec.eta_grid:
        for eta in spec.eta_grid:
            dims = _grown_dims(spec, eta)
            yield f"n={dims.n} p={dims.p} m={dims.m} r={dims.r} eta={eta:g}", dims
    else:
        yield (f"n={spec.n} p={spec.p} m={spec.m} r={spec.r}",
               Dims(spec.n, spec.p, spec.m, spec.r))


def typeI_sweep(spec: ExperimentSpec) -> ResultTable:
    """Null rejection rates over a dimension grid.

    The canonical generator samples the sums of squares directly; the linear
    generator builds Y = X B + E with B = 0 and tests [I_r 0] B = 0.
    """
    if spec.signal[0] != "null":
        raise DomainError("typeI_sweep requires a null signal")
    rows = []
    for cell_id, (cell, dims) in enumerate(_null_cells(spec)):
        if spec.generator == "canonical":
            def draw(rng, dims=dims):
                return canonical_form_sample(rng, None, dims)
        else:
            cell_spec = replace(spec, p=dims.p, m=dims.m, r=dims.r)
            hyp = _leading_identity(dims)

            def draw(rng, cell_spec=cell_spec, hyp=hyp):
                return hypothesis_ss(gen_linear_model(rng, cell_spec), hyp)

        rows.extend(_estimate_cell(spec, cell_id, cell, spec.methods, draw))
    return ResultTable(rows)


def power_sweep(spec: ExperimentSpec) -> ResultTable:
    """Rejection rates along the signal grid, plus the t1 theory prediction.

    Canonical cells use ("spikes", ratios) signals whose strengths are
    tr(Omega)/m targets; a "t1_theory" row (reps 0) carries the asymptotic
    prediction for the same cell whenever its regime conditions hold. Linear
    cells interpret the grid as coefficient sizes.
    """
    if not spec.signal_grid:
        raise DomainError("power_sweep needs a non-empty signal_grid")
    dims = Dims(spec.n, spec.p, spec.m, spec.r)
    rows = []
    for cell_id, strength in enumerate(spec.signal_grid):
        if spec.generator == "canonical":
            if spec.signal[0] != "spikes":
                raise DomainError("canonical power cells need a ('spikes', ratios) signal")
            cell = f"trace_ratio={strength:g}"
            signal = _spike_signal(spec.signal[1], float(strength), dims)

            def draw(rng, signal=signal):
                return canonical_form_sample(rng, signal, dims)

            rows.extend(_estimate_cell(spec, cell_id, cell, spec.methods, draw))
            started = time.perf_counter()
            try:
                deltas = [d for d in np.diag(signal.delta(dims.n)) if d > 0.0]
                pred = theoretical_power(PowerSpec(
                    tuple(deltas), dims.p / dims.n, dims.r / dims.n,
                    dims.m / dims.n, spec.alpha))
                rows.append(ResultRow(cell, "t1_theory", pred, 0.0, 0,
                                      time.perf_counter() - started))
            except (RegimeError, DomainError) as exc:
                rows.append(ResultRow(cell, "t1_theory", None, None, 0,
                                      time.perf_counter() - started,
                                      f"infeasible: {exc}"))
        else:
            cell = f"signal={strength:g}"
            hyp = _leading_identity(dims)

            def draw(rng, strength=float(strength), hyp=hyp):
                return hypothesis_ss(gen_linear_model(rng, spec, strength), hyp)

            rows.extend(_estimate_cell(spec, cell_id, cell, spec.methods, draw))
    return ResultTable(rows)


def multisplit_sweep(spec: ExperimentSpec, j_grid=(0, 50, 200), delta: float = 0.2,
                     split_ratio: float = 0.3, pca_policy=None, gamma_min=None) -> ResultTable:
    """Multi-split rejection rates for each J in the grid.

    The hypothesis is [I_r 0] B = 0 on linear-model data; J = 0 runs the
    deliberately unsafe screen-and-test-on-everything negative control. Each
    replicate owns a derived seed, so tables are thread-count invariant.
    """
    if spec.generator != "linear":
        raise DomainError("multisplit_sweep requires the linear generator")
    dims = Dims(spec.n, spec.p, spec.m, spec.r)
    hyp = _leading_identity(dims)
    strengths = spec.signal_grid if spec.signal_grid else (0.0,)
    rows = []
    cell_id = 0
    for strength in strengths:
        for j in j_grid:
            if j < 0:
                raise DomainError(f"split count must be >= 0, got {j}")
            cell = f"signal={strength:g} J={j}"
            started = time.perf_counter()

            def one_rep(rep, j=j, strength=float(strength), cell_id=cell_id):
                rng = stream(spec.seed, cell_id, rep)
                data = gen_linear_model(rng, spec, strength)
                cfg = MultiSplitConfig(
                    j_splits=max(j, 1), gamma_min=gamma_min, delta=delta,
                    split_ratio=split_ratio,
                    seed=derive_seed(spec.seed, cell_id, rep),
                    pca_policy=pca_policy)
                if j == 0:
                    return no_split_pvalue(data, hyp, cfg).p_value <= spec.alpha
                return multisplit_test(data, hyp, cfg, alpha=spec.alpha).reject

            try:
                if spec.threads > 1:
                    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
                        hits = sum(pool.map(one_rep, range(spec.reps)))
                else:
                    hits = sum(one_rep(rep) for rep in range(spec.reps))
                rate = hits / spec.reps
                se = math.sqrt(rate * (1.0 - rate) / spec.reps)
                rows.append(ResultRow(cell, f"multisplit_J{j}", rate, se, spec.reps,
                                      time.perf_counter() - started))
            except MvlrtError as exc:
                rows.append(ResultRow(cell, f"multisplit_J{j}", None, None, spec.reps,
                                      time.perf_counter() - started, f"infeasible: {exc}"))
            cell_id += 1
    return ResultTable(rows)


def gamma_sensitivity(j_splits: int = 200, rho_grid=(0.0, 0.5, 1.0),
                      gamma_grid=(0.005, 0.05, 0.2, 0.5, 0.8, 1.0),
                      reps: int = 10_000, alpha: float = 0.05, seed: int = 0,
                      threads: int = 1) -> ResultTable:
    """Estimate P{psi(alpha gamma) >= gamma} on equi-correlated synthetic p-values.

    p-values are upper tails of jointly Gaussian variables with equal
    correlation rho; psi(u) is the fraction of the J p-values at or below u.
    This probes which quantile level gamma the aggregation should favor as
    the dependence between splits varies: near-independent p-values push the
    maximizer toward 1/J, perfectly dependent ones toward 1.
    """
    if j_splits < 1 or reps < 1:
        raise DomainError("j_splits and reps must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha!r}")
    for g in gamma_grid:
        if not 0.0 < g <= 1.0:
            raise DomainError(f"gamma values must lie in (0,1], got {g!r}")
    gammas = np.asarray(gamma_grid, dtype=float)
    rows = []
    for cell_id, rho in enumerate(rho_grid):
        if not 0.0 <= rho <= 1.0:
            raise DomainError(f"equicorrelation must lie in [0,1], got {rho!r}")
        started = time.perf_counter()

        def chunk(bounds, rho=rho, cell_id=cell_id):
            lo, hi = bounds
            local = np.zeros(gammas.size, dtype=np.int64)
            for rep in range(lo, hi):
                rng = stream(seed, cell_id, rep)
                shared = rng.standard_normal()
                own = rng.standard_normal(j_splits)
                v = math.sqrt(rho) * shared + math.sqrt(1.0 - rho) * own
                pv = ndtr(-v)
                psi = np.mean(pv[None, :] <= alpha * gammas[:, None], axis=1)
                local += psi >= gammas
            return local

        edges = np.linspace(0, reps, min(threads, reps) * 4 + 1).astype(int)
        pieces = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if a < b]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                totals = sum(pool.map(chunk, pieces))
        else:
            totals = sum(chunk(c) for c in pieces)
        elapsed = time.perf_counter() - started
        for g, hits in zip(gammas, totals):
            rate = hits / reps
            rows.append(ResultRow(f"rho={rho:g} gamma={g:g}", "psi_level", rate,
                                  math.sqrt(rate * (1.0 - rate) / reps), reps, elapsed))
    return ResultTable(rows)
