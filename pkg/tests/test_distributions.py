"""Distribution primitives against frozen high-precision oracles.

The literal constants below were produced by a 50-digit evaluation
(complementary error function for the normal, regularized incomplete gamma
plus bisection for chi-square) and are independent of the implementation
under test.
"""

import math

import numpy as np
import pytest

from mvlrt.distributions import (
    Tw1Table,
    chi_sq_tail,
    chi_sq_upper_quantile,
    sample_beta,
    std_normal_tail,
    std_normal_upper_quantile,
    tw1_cdf,
    tw1_upper_quantile,
)
from mvlrt.errors import DataFormatError, DomainError
from mvlrt.rng import stream

# x -> 1 - Phi(x), 50-digit erfc oracle
NORMAL_TAILS = {
    0.0: 0.5,
    1.0: 0.15865525393145705,
    1.6449: 0.0499952174683463,
    2.0: 0.02275013194817921,
    3.0: 0.0013498980316300946,
    -1.0: 0.8413447460685429,
}

# alpha -> z_alpha, bisection against the same oracle
NORMAL_QUANTILES = {
    0.05: 1.6448536269514726,
    0.025: 1.9599639845400543,
    0.01: 2.326347874040841,
    0.1: 1.2815515655446004,
    0.5: 0.0,
}

# (df, alpha) -> upper quantile, series/continued-fraction gamma oracle
CHI2_QUANTILES = {
    (2, 0.5): 1.3862943611198906,
    (4, 0.05): 9.487729036781157,
    (1, 0.05): 3.841458820694126,
    (40, 0.01): 63.69073975156446,
    (10, 0.9): 4.865182051925329,
}


def test_normal_tail_oracle_values():
    for x, want in NORMAL_TAILS.items():
        assert std_normal_tail(x) == pytest.approx(want, abs=1e-12)


def test_normal_tail_decay():
    assert std_normal_tail(40.0) < 1e-300


def test_normal_quantile_oracle_values():
    for alpha, want in NORMAL_QUANTILES.items():
        assert std_normal_upper_quantile(alpha) == pytest.approx(want, abs=1e-10)


def test_normal_round_trip_grid():
    # 100-probability grid, quantile then tail must invert to 1e-10
    for a in np.linspace(0.005, 0.995, 100):
        z = std_normal_upper_quantile(float(a))
        assert std_normal_tail(z) == pytest.approx(float(a), abs=1e-10)


def test_normal_domain_errors():
    with pytest.raises(DomainError):
        std_normal_tail(float("nan"))
    with pytest.raises(DomainError):
        std_normal_tail(float("inf"))
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            std_normal_upper_quantile(bad)


def test_chi2_quantile_oracle_values():
    for (df, alpha), want in CHI2_QUANTILES.items():
        assert chi_sq_upper_quantile(alpha, df) == pytest.approx(want, rel=1e-8)


def test_chi2_closed_forms():
    # df=2 is exponential: upper median is 2 ln 2
    assert chi_sq_upper_quantile(0.5, 2) == pytest.approx(2.0 * math.log(2.0), rel=1e-12)
    # df=1 is a squared normal
    z = std_normal_upper_quantile(0.025)
    assert chi_sq_upper_quantile(0.05, 1) == pytest.approx(z * z, rel=1e-9)


def test_chi2_tail_at_zero_and_round_trip():
    assert chi_sq_tail(0.0, 3) == 1.0
    assert chi_sq_tail(-5.0, 3) == 1.0
    for df in (1, 2, 7, 40):
        for a in np.linspace(0.01, 0.99, 100):
            x = chi_sq_upper_quantile(float(a), df)
            assert chi_sq_tail(x, df) == pytest.approx(float(a), rel=1e-8)


def test_chi2_domain_errors():
    for bad_alpha in (0.0, 1.0, -1.0):
        with pytest.raises(DomainError):
            chi_sq_upper_quantile(bad_alpha, 3)
    for bad_df in (0, -2, 2.5):
        with pytest.raises(DomainError):
            chi_sq_upper_quantile(0.05, bad_df)
    with pytest.raises(DomainError):
        chi_sq_tail(float("inf"), 2)


def test_chi2_quantile_against_monte_carlo():
    """Exceedance count of summed squared normals is binomial around N alpha."""
    alpha = 0.05
    n_draws = 20_000
    for df in (1, 4, 40):
        rng = stream(2024, df)
        draws = np.sum(rng.standard_normal((n_draws, df)) ** 2, axis=1)
        q = chi_sq_upper_quantile(alpha, df)
        hits = int(np.sum(draws > q))
        slack = 3.0 * math.sqrt(n_draws * alpha * (1.0 - alpha))
        assert abs(hits - n_draws * alpha) <= slack, f"df={df}: {hits} exceedances"


# === Tracy-Widom order 1 ===


def test_tw1_table_invariants():
    table = Tw1Table.embedded()
    assert table.s[0] <= -10.0 and table.s[-1] >= 6.0
    assert np.all(np.diff(table.s) > 0)
    assert np.max(np.diff(table.s)) <= 0.05 + 1e-12
    assert np.all(np.diff(table.F) >= 0)
    i10 = np.searchsorted(table.s, -10.0, side="right") - 1
    assert table.F[i10] < 1e-8
    assert table.F[-1] > 1.0 - 1e-8


def test_tw1_interpolant_monotone_between_grid_points():
    dense = np.linspace(-11.0, 7.0, 4001)
    vals = np.array([tw1_cdf(float(s)) for s in dense])
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[0] >= 0.0 and vals[-1] <= 1.0


def test_tw1_cdf_monotone_points():
    assert tw1_cdf(-5.0) < tw1_cdf(0.0) < tw1_cdf(2.0)


def test_tw1_upper_quantile_value():
    # offline Painleve II oracle puts the upper 5% point near 0.9793
    assert tw1_upper_quantile(0.05) == pytest.approx(0.9793, abs=1e-2)


def test_tw1_round_trips():
    assert tw1_cdf(tw1_upper_quantile(0.1)) == pytest.approx(0.9, abs=1e-3)
    for a in (0.01, 0.05, 0.5, 0.9):
        s = tw1_upper_quantile(a)
        assert tw1_cdf(s) == pytest.approx(1.0 - a, abs=1e-3)


def test_tw1_tail_extrapolation():
    # beyond the grid the tails keep decaying / saturating in the right direction
    assert tw1_cdf(-14.0) < tw1_cdf(-12.0) < 1e-8
    assert tw1_cdf(14.0) >= tw1_cdf(11.0)
    assert tw1_cdf(14.0) <= 1.0
    with pytest.raises(DomainError):
        tw1_cdf(float("nan"))
    with pytest.raises(DomainError):
        tw1_upper_quantile(1.5)


def test_tw1_table_dump_load_round_trip(tmp_path):
    table = Tw1Table.embedded()
    path = tmp_path / "tw.csv"
    table.dump(path)
    back = Tw1Table.load(path)
    assert np.array_equal(back.s, table.s)
    assert np.array_equal(back.F, table.F)


def test_tw1_table_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("s,F\n0.0,0.5,9\n")
    with pytest.raises(DataFormatError):
        Tw1Table.load(path)
    path.write_text("wrong,header\n0.0,0.5\n")
    with pytest.raises(DataFormatError):
        Tw1Table.load(path)


def test_tw1_table_rejects_bad_grids():
    s = np.arange(-12.0, 10.01, 0.02)
    f_ok = np.clip(np.linspace(-0.1, 1.1, s.size), 0.0, 1.0)
    f_ok[0] = 0.0
    f_ok[-1] = 1.0
    with pytest.raises(DomainError):
        Tw1Table(s[::-1], f_ok)  # decreasing grid
    with pytest.raises(DomainError):
        Tw1Table(s[::4], f_ok[::4])  # spacing too coarse
    shallow = np.clip(np.linspace(0.1, 0.9, s.size), 0.0, 1.0)
    with pytest.raises(DomainError):
        Tw1Table(s, shallow)  # tails not reached


# === beta sampling ===


def test_beta_moments():
    rng = stream(7)
    draws = sample_beta(rng, 2.0, 3.0, size=100_000)
    assert draws.mean() == pytest.approx(0.4, abs=0.01)
    # closed form ab / ((a+b)^2 (a+b+1)) = 0.04
    assert draws.var() == pytest.approx(0.04, abs=0.005)


def test_beta_support_and_scalar():
    rng = stream(8)
    draws = sample_beta(rng, 0.5, 0.5, size=5000)
    assert np.all(draws > 0.0) and np.all(draws < 1.0)
    one = sample_beta(stream(9), 2.0, 2.0)
    assert isinstance(one, float) and 0.0 < one < 1.0


def test_beta_reproducible_and_domain():
    a = sample_beta(stream(5, 1), 2.0, 3.0, size=10)
    b = sample_beta(stream(5, 1), 2.0, 3.0, size=10)
    assert np.array_equal(a, b)
    for bad in ((0.0, 1.0), (1.0, -2.0), (float("nan"), 1.0)):
        with pytest.raises(DomainError):
            sample_beta(stream(0), *bad)
