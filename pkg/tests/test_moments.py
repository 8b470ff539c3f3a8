import math
from fractions import Fraction

import numpy as np
import pytest

from setpartclt.bell import build_bell_table, solve_alpha
from setpartclt.moments import (
    asymptotic_moments,
    blocks_moments_asymptotic,
    cr_moments_asymptotic,
    dim_moments_asymptotic,
    exact_moments,
    levels_moments_asymptotic,
    levels_moments_exact,
    m_moment_power,
    m_moment_power_numeric,
    m_moments_exact,
    moment_report,
    transfer_count,
    transfer_moments,
)
from setpartclt.partition import STATISTICS, enumerate_partitions
from setpartclt.sampler import sample_m, sample_statistics

from conftest import SEED


def enumeration_moments(n, stat):
    f = STATISTICS[stat]
    vals = [f(p) for p in enumerate_partitions(n)]
    mean = Fraction(sum(vals), len(vals))
    return mean, Fraction(sum(v * v for v in vals), len(vals)) - mean * mean


def test_levels_small_cases():
    assert levels_moments_exact(3).mean == Fraction(4, 5)
    r = levels_moments_exact(2)
    assert (r.mean, r.variance) == (Fraction(1, 2), Fraction(1, 4))


@pytest.mark.parametrize("n", range(2, 11))
def test_levels_exact_equals_enumeration(n):
    r = levels_moments_exact(n)
    assert (r.mean, r.variance) == enumeration_moments(n, "levels")
    assert r.kind == "exact" and r.variance >= 0


@pytest.mark.parametrize("n", range(3, 60))
def test_levels_total_variance_identity(n):
    t = build_bell_table(n)
    inv1 = m_moment_power(n, -1, t)
    inv2 = m_moment_power(n, -2, t)
    lhs = levels_moments_exact(n, t).variance
    rhs = (n - 1) * (inv1 - inv2) + (n - 1) ** 2 * (inv2 - inv1 * inv1)
    assert lhs == rhs


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("stat", ["levels", "dimension", "crossings", "blocks"])
def test_transfer_equals_enumeration(n, stat):
    r = transfer_moments(n, stat)
    assert (r.mean, r.variance) == enumeration_moments(n, stat)


def test_transfer_count_is_bell():
    t = build_bell_table(40)
    assert all(transfer_count(n) == t[n] for n in range(1, 41))


@pytest.mark.parametrize("n", [11, 25, 60, 150])
def test_transfer_levels_matches_closed_form(n):
    a, b = transfer_moments(n, "levels"), levels_moments_exact(n)
    assert (a.mean, a.variance) == (b.mean, b.variance)


@pytest.mark.parametrize("n", [5, 30, 120])
def test_blocks_exact_vs_box_moments(n):
    # empty boxes are independent of the partition with mean and variance 1
    k, m = transfer_moments(n, "blocks"), m_moments_exact(n)
    assert k.mean == m.mean - 1
    assert k.variance == m.variance - 1


def test_m_moments():
    t = build_bell_table(10)
    assert m_moments_exact(2, t).mean == Fraction(5, 2)
    assert m_moment_power(7, 0, t) == 1
    r = m_moments_exact(5, t)
    assert r.variance == Fraction(t[7], t[5]) - Fraction(t[6], t[5]) ** 2
    with pytest.raises(ValueError):
        m_moment_power(3, -3, t)
    with pytest.raises(ValueError):
        m_moments_exact(9, t)


@pytest.mark.parametrize("n", [3, 10, 40, 100])
@pytest.mark.parametrize("d", [-2, -1, 0, 1, 2])
def test_m_power_vs_dobinski_sum(n, d):
    exact = m_moment_power(n, d)
    assert float(exact) == pytest.approx(m_moment_power_numeric(n, d), rel=1e-9)


def test_m_mean_monte_carlo():
    rng = np.random.default_rng(SEED)
    r = m_moments_exact(50)
    draws = sample_m(50, rng, size=200_000)
    assert abs(draws.mean() - float(r.mean)) < 4 * math.sqrt(float(r.variance) / len(draws))


def test_asymptotic_requires_n10():
    for f in (dim_moments_asymptotic, cr_moments_asymptotic, levels_moments_asymptotic):
        with pytest.raises(ValueError):
            f(9)
    with pytest.raises(ValueError):
        asymptotic_moments(100, "nestings")


def test_asymptotic_signs_and_growth():
    ns = [100, 300, 1000, 3000, 10**4, 10**5, 10**6]
    dims = [dim_moments_asymptotic(n) for n in ns]
    assert all(r.mean > 0 and r.variance > 0 for r in dims)
    assert all(a.mean < b.mean and a.variance < b.variance for a, b in zip(dims, dims[1:]))
    for n in range(10, 2000, 7):
        assert dim_moments_asymptotic(n).variance > 0
        if solve_alpha(n).alpha >= 2.5:
            assert cr_moments_asymptotic(n).mean >= 0


def test_levels_asymptotic():
    n = 10
    assert levels_moments_asymptotic(n).mean == pytest.approx(float(levels_moments_exact(n).mean), rel=0.25)
    r = levels_moments_asymptotic(100)
    assert r.mean == r.variance == solve_alpha(100).alpha


def test_levels_exact_over_alpha_large_n():
    ratios = []
    for n in (100, 1000, 10**4):
        # (n-1) E(1/M) by direct Dobinski summation when the Bell table is out of reach
        mean = (n - 1) * m_moment_power_numeric(n, -1)
        ratios.append(mean / solve_alpha(n).alpha)
    assert float(levels_moments_exact(100).mean) / solve_alpha(100).alpha == pytest.approx(ratios[0], rel=1e-10)
    assert 0.9 <= ratios[-1] <= 1.1
    gaps = [abs(1 - r) for r in ratios]
    assert gaps[0] > gaps[1] > gaps[2]


def test_cr_small_n_fixture():
    # exact average over the 15 partitions of [4]; asymptotics are not meant to apply here
    assert exact_moments(4, "crossings").mean == Fraction(1, 15)


def test_blocks_asymptotic():
    r = blocks_moments_asymptotic(1000)
    a = solve_alpha(1000).alpha
    assert (r.mean, r.variance) == (1000 / a, 1000 / a**2)


def test_asymptotic_ratio_tends_to_one():
    for stat in ("dimension", "crossings"):
        gaps = [
            abs(float(transfer_moments(n, stat).variance) / asymptotic_moments(n, stat).variance - 1)
            for n in (100, 300, 1000)
        ]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] <= 0.2


@pytest.mark.parametrize("stat", ["dimension", "crossings"])
def test_mc_variance_vs_exact_n100(stat):
    col = {"dimension": 1, "crossings": 2}[stat]
    x = sample_statistics(100, 100_000, SEED)[:, col].astype(float)
    exact = transfer_moments(100, stat)
    assert abs(x.var() / float(exact.variance) - 1) <= 0.15
    se = math.sqrt(float(exact.variance) / len(x))
    assert abs(x.mean() - float(exact.mean)) < 4 * se


def test_report_dispatch_and_dict():
    r = moment_report(12, "dimension", "exact")
    d = r.to_dict()
    assert d["kind"] == "exact" and "/" in d["mean_exact"]
    assert moment_report(12, "levels").mean == levels_moments_exact(12).mean
    with pytest.raises(ValueError):
        moment_report(12, "levels", "approximate")
