"""Regenerate the embedded Tracy-Widom (order 1) CDF table.

Solves the Painleve II equation q'' = s q + 2 q^3 along the Hastings-McLeod
branch and assembles

    F1(s) = exp( -1/2 * int_s^inf q(x) dx ) * exp( -1/2 * int_s^inf (x-s) q(x)^2 dx ).

Naive shooting falls off the branch well before s = -12 (the linearization has
an exponential dichotomy on both sides), so the branch is computed as a
two-point boundary value problem instead: q(+10) = Ai(10) on the right and the
left asymptote q(s) ~ sqrt(-s/2) * (1 + 1/(8 s^3) - 73/(128 s^6)) at s = -12.
The tail integrals beyond +10 use q = Ai exactly (relative error there is
below 1e-30).  Output: two-column CSV "s,F" on a uniform grid, written to
src/mvlrt/data/tw1_cdf.csv.

Run from the repository root:  python3 scripts/make_tw1_table.py
"""

import pathlib

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_bvp
from scipy.special import airy, itairy

S_HI = 10.0
S_LO = -12.0
STEP = 0.02  # output grid
FINE = 0.001  # quadrature grid

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "mvlrt" / "data" / "tw1_cdf.csv"


def rhs(s, y):
    return np.vstack((y[1], s * y[0] + 2.0 * y[0] ** 3))


def left_asymptote(s):
    return np.sqrt(-s / 2.0) * (1.0 + 1.0 / (8.0 * s**3) - 73.0 / (128.0 * s**6))


def bc(ya, yb):
    return np.array([ya[0] - left_asymptote(S_LO), yb[0] - airy(S_HI)[0]])


def main():
    mesh = np.linspace(S_LO, S_HI, 2201)
    guess = np.empty((2, mesh.size))
    # crude branch shape: left asymptote glued to Ai through the origin
    ai, aip, _, _ = airy(np.minimum(mesh, 12.0))
    left = mesh < -1.0
    guess[0] = np.where(left, np.sqrt(np.abs(mesh) / 2.0), ai)
    guess[1] = np.where(left, -0.25 / np.sqrt(np.abs(mesh) / 2.0 + 1e-9), aip)
    sol = solve_bvp(rhs, bc, mesh, guess, tol=1e-10, max_nodes=200000)
    if sol.status != 0:
        raise RuntimeError(f"BVP solver failed: {sol.message}")

    n_fine = int(round((S_HI - S_LO) / FINE))
    fine = np.linspace(S_LO, S_HI, n_fine + 1)
    q = sol.sol(fine)[0]

    # tail corrections beyond S_HI where q(x) = Ai(x)
    apt, _, _, _ = itairy(S_HI)  # int_0^{S_HI} Ai
    tail_q = 1.0 / 3.0 - apt
    tail_q2 = quad(lambda x: airy(x)[0] ** 2, S_HI, np.inf)[0]
    tail_xq2 = quad(lambda x: x * airy(x)[0] ** 2, S_HI, np.inf)[0]

    # right-anchored cumulative integrals: int_s^{S_HI} f(x) dx
    def right_cumulative(vals):
        c = cumulative_trapezoid(vals, fine, initial=0.0)
        return c[-1] - c

    int_q = right_cumulative(q) + tail_q
    int_q2 = right_cumulative(q * q) + tail_q2
    int_xq2 = right_cumulative(fine * q * q) + tail_xq2
    int_shifted = int_xq2 - fine * int_q2  # int_s^inf (x - s) q^2

    log_f = -0.5 * int_q - 0.5 * int_shifted
    f = np.exp(log_f)
    f = np.clip(f, 0.0, 1.0)
    f = np.maximum.accumulate(f)  # scrub floating dust in the far left tail

    stride = int(round(STEP / FINE))
    grid = fine[::stride]
    fgrid = f[::stride]
    assert abs(grid[0] - S_LO) < 1e-12 and abs(grid[-1] - S_HI) < 1e-12

    # cross-checks against known values of the law
    df = np.gradient(f, fine)
    mean = np.trapezoid(fine * df, fine)
    var = np.trapezoid(fine**2 * df, fine) - mean**2
    print(f"mean  {mean:+.6f}   (literature -1.206534)")
    print(f"var    {var:.6f}   (literature  1.607781)")
    print(f"F(-10) {f[np.argmin(np.abs(fine + 10.0))]:.3e}   F(6) {f[np.argmin(np.abs(fine - 6.0))]:.10f}")
    for prob, ref in [(0.90, 0.4501), (0.95, 0.9793), (0.99, 2.0234)]:
        idx = np.searchsorted(f, prob)
        s_lo, s_hi = fine[idx - 1], fine[idx]
        f_lo, f_hi = f[idx - 1], f[idx]
        s_q = s_lo + (prob - f_lo) * (s_hi - s_lo) / (f_hi - f_lo)
        print(f"q({prob:.2f}) {s_q:+.5f}   (literature {ref:+.4f})")

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w") as fh:
        fh.write("s,F\n")
        for s, p in zip(grid, fgrid):
            fh.write(f"{s:.2f},{p:.16e}\n")
    print(f"wrote {OUT} ({grid.size} rows)")


if __name__ == "__main__":
    main()
