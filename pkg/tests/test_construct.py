import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from apcf import cf
from apcf.ap import check_F_membership, check_G_membership
from apcf.construct import (
    boundary_chain_ok,
    digit_window,
    length_ratio_check,
    local_dim_ratio,
    local_dim_rows,
    make_params,
    mu_additivity_check,
    mu_cylinder,
    neighbor_count_check,
    ratio_series,
    sample_point,
)
from apcf.errors import RadiusOutOfRange, ScheduleInfeasible, ZeroMeasure
from apcf.seqspec import parse

NU = parse("nu(n) = n")
SIGMA = parse("sigma(n) = n*(n+1)")


def L(i, t):
    return (2 * i + 1) ** t - (2 * i) ** t


# F, nu = n, schedule 3, 9, 81: free positions written out by hand
F_FREE = set(range(1, 4)) | set(range(6, 10)) | set(range(18, 82))
# G, sigma = n(n+1): V_k = [sigma(k-1)+k-1, sigma(k)], sigma(0) = 1
G_FREE = {i for k in range(1, 12) for i in range(max(1, (k - 1) * k + k - 1) if k > 1 else 1, k * (k + 1) + 1)}


def mu_oracle(digits, free, t):
    den = 1
    for i in range(1, len(digits) + 1):
        if i in free:
            den *= L(i, t)
    return Fraction(1, den)


@pytest.fixture(scope="module")
def pf():
    return make_params("F", NU, 2, schedule=[3, 9, 81])


@pytest.fixture(scope="module")
def pg():
    return make_params("G", SIGMA, 2, cover=120)


def test_digit_window(pf):
    w = digit_window(pf, 1)
    assert w.free and (w.lo, w.hi) == (4, 9)
    w = digit_window(pf, 2)
    assert (w.lo, w.hi) == (16, 25)
    w = digit_window(pf, 4)
    assert not w.free and w.anchor == 3 and w.offset == 1


def test_mu_examples(pf):
    assert mu_cylinder(pf, [4]) == Fraction(1, 5)
    assert mu_cylinder(pf, [4, 16]) == Fraction(1, 45)
    assert mu_cylinder(pf, [3]) == 0
    assert mu_cylinder(pf, [4, 16, 36, 40]) == 0  # forced digit should be 37


def test_additivity_example(pf):
    r = mu_additivity_check(pf, [4])
    assert r["ok"] and r["children_sum"] == Fraction(1, 5) and r["free"]
    r = mu_additivity_check(pf, [4, 16, 36])
    assert r["ok"] and not r["free"]


def test_normalisation(pf, pg):
    for p in (pf, pg):
        r = mu_additivity_check(p, ())
        assert r["ok"] and r["parent"] == 1


@given(st.integers(0, 10**9), st.integers(1, 80))
def test_mu_matches_oracle_F(pf, seed, depth):
    d = sample_point(pf, seed, depth)
    assert mu_cylinder(pf, d) == mu_oracle(d, F_FREE, 2)


@given(st.integers(0, 10**9), st.integers(1, 120))
def test_mu_matches_oracle_G(pg, seed, depth):
    d = sample_point(pg, seed, depth)
    assert mu_cylinder(pg, d) == mu_oracle(d, G_FREE, 2)


@given(st.integers(0, 10**9), st.integers(0, 10**9), st.integers(1, 60))
def test_mu_depends_only_on_depth(pg, s1, s2, depth):
    a, b = sample_point(pg, s1, depth), sample_point(pg, s2, depth)
    assert mu_cylinder(pg, a) == mu_cylinder(pg, b)
    if depth > 1:
        assert mu_cylinder(pg, a) <= mu_cylinder(pg, a[:-1])


@given(st.integers(0, 10**6), st.integers(0, 15))
def test_additivity_random_prefix(pf, seed, depth):
    d = sample_point(pf, seed, depth) if depth else ()
    assert mu_additivity_check(pf, d)["ok"]


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_samples_in_J(seed, t):
    for fam, spec in (("F", NU), ("G", SIGMA)):
        p = make_params(fam, spec, t, cover=300)
        d = sample_point(p, seed, 300)
        assert cf.is_strictly_increasing(d)
        assert boundary_chain_ok(p, d)


def test_membership_of_samples(pf, pg):
    assert check_G_membership(sample_point(pg, 11, 120), SIGMA).verdict == "consistent"
    rep = check_F_membership(sample_point(pf, 11, 160), NU)
    assert {1, 2, 3, 9} <= {w[0] for w in rep.witnesses}


def test_sampling_deterministic(pf):
    assert sample_point(pf, 7, 50) == sample_point(pf, 7, 50)
    m = sample_point(pf, 0, 20, mode="min")
    assert m[:3] == (4, 16, 36) and m == sample_point(pf, 99, 20, mode="min")


def test_local_dim_example(pf):
    assert local_dim_ratio(pf, [4], 1) == pytest.approx(math.log(5) / math.log(20), abs=1e-12)
    with pytest.raises(ZeroMeasure):
        local_dim_ratio(pf, [3], 1)


def direct_A(part, t, k, lengths, anchors):
    with mp.workdps(30):
        num = mp.fsum(mp.log(L(i, t)) for m in range(k) for i in part.V[m])
        den = mp.fsum(t * mp.log(2 * i + 1) for m in range(k) for i in part.V[m])
        den += mp.fsum((lengths[m] - 1) * mp.log((2 * anchors[m] + 1) ** t + lengths[m]) for m in range(k))
        return num / (2 * den + mp.log(2))


def direct_B(part, t, k):
    v = part.V[k]
    best = mp.inf
    num = den = mp.mpf(0)
    with mp.workdps(30):
        for n in v:
            num += mp.log(L(n, t))
            den += 2 * t * mp.log(2 * n + 1)
            best = min(best, num / den)
    return best


def test_ratio_series_against_direct_sums_F():
    p = make_params("F", NU, 2, schedule=[3, 9, 81, 6561])
    rs = ratio_series(p, 3)
    part = p.partition
    for k in (1, 2, 3):
        ref = direct_A(part, 2, k, [3, 9, 81], [3, 9, 81])
        assert abs(rs.A[k - 1] - ref) <= rs.A_err[k - 1] + 1e-12
        assert abs(rs.B[k - 1] - direct_B(part, 2, k)) <= rs.B_err[k - 1] + 1e-12


def test_ratio_series_against_direct_sums_G():
    p = make_params("G", SIGMA, 3, k_min=9)
    rs = ratio_series(p, 8)
    for k in range(1, 9):
        ref = direct_A(p.partition, 3, k, list(range(1, 9)), [m * (m + 1) for m in range(1, 9)])
        assert abs(rs.A[k - 1] - ref) <= rs.A_err[k - 1] + 1e-12
        assert abs(rs.B[k - 1] - direct_B(p.partition, 3, k)) <= rs.B_err[k - 1] + 1e-12


def test_ratio_limits_F():
    rs = ratio_series(make_params("F", NU, 2, k_min=8), 7)
    assert rs.limit_A == pytest.approx(1 / 8) and rs.limit_B == pytest.approx(1 / 4)
    assert abs(rs.A[-1] - 1 / 8) < 2e-3
    assert abs(rs.B[-1] - 1 / 4) < 2e-3


def test_ratio_limits_G():
    rs = ratio_series(make_params("G", SIGMA, 3, k_min=40), 39)
    assert rs.limit_A == pytest.approx(1 / 6)
    assert min(rs.A[-10:]) >= 1 / 6
    assert rs.B[-1] == pytest.approx(1 / 3, abs=0.03)


def test_ratio_series_infeasible():
    p = make_params("F", NU, 2, schedule=[3, 9])
    with pytest.raises(ScheduleInfeasible):
        ratio_series(p, 2)


@pytest.mark.parametrize("family, spec", [("F", NU), ("G", SIGMA)])
def test_local_ratio_lower_bound(family, spec):
    p = make_params(family, spec, 2, cover=200)
    for seed in (0, 1):
        rows = local_dim_rows(p, sample_point(p, seed, 200))
        assert all(r["ok"] for r in rows if r["ok"] is not None)
        assert sum(r["ok"] is not None for r in rows) > 190


def neighbor_oracle(d, r):
    """Count depth-n cylinders with the parent prefix meeting [x-r, x+r]."""
    lens = [Fraction(1, q) for q in cf.cylinder_lengths_den(d)]
    n = next(k for k in range(1, len(d)) if lens[k] <= r < lens[k - 1])
    x = cf.fundamental_interval(d).midpoint()
    lo, hi = x - r, x + r
    count = 0
    for j in range(1, d[n - 1] + 200):
        iv = cf.fundamental_interval(list(d[:n - 1]) + [j])
        left_ok = iv.lo <= hi if iv.closed_left else iv.lo < hi
        right_ok = lo < iv.hi if iv.closed_left else lo <= iv.hi
        count += left_ok and right_ok
    return count


@given(st.integers(0, 10**6), st.integers(1, 27), st.integers(0, 999))
def test_neighbor_count(seed, n, frac):
    p = make_params("F", NU, 2, cover=30)
    d = sample_point(p, seed, 30)
    lens = [Fraction(1, q) for q in cf.cylinder_lengths_den(d)]
    r = lens[n] + (lens[n - 1] - lens[n]) * Fraction(frac, 1000)
    c = neighbor_count_check(d, r)
    assert c == neighbor_oracle(d, r)
    assert 1 <= c <= 4


def test_neighbor_small_radius():
    d = (4, 16, 36, 37, 38, 100)
    lens = [Fraction(1, q) for q in cf.cylinder_lengths_den(d)]
    assert neighbor_count_check(d, lens[5]) <= 4
    with pytest.raises(RadiusOutOfRange):
        neighbor_count_check(d, Fraction(1, 10**60))


def test_length_ratio(pf):
    d = sample_point(make_params("F", NU, 2, cover=201), 3, 201)
    ratios = length_ratio_check(d, 200)
    assert all(0.9 <= x <= 1.1 for x in ratios[-10:])
    assert len(length_ratio_check(d, 1)) == 1
