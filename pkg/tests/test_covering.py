import itertools
import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from apcf.covering import (
    ap_series_bound,
    check_f_certificate,
    descend_sum_bound,
    dim_formula,
    dim_upper_scan,
    f_certificate,
    g_certificate,
    h_recursion_audit,
    zeta_tail,
)
from apcf.errors import NoCertificate, ParameterOutOfRange, StageBoundViolated
from apcf.seqspec import parse

NU = parse("nu(n) = n")
GAP2N = parse("sigma(n) = n*(n-1) + 1")


def ap_oracle(a, ell, s, M):
    with mp.workdps(30):
        return mp.fsum(mp.fprod((a + i * m) ** (-2 * mp.mpf(s)) for i in range(ell + 1)) for m in range(1, M + 1))


def descend_oracle(c, n, s, gamma, T):
    total = 0.0
    for tup in itertools.combinations(range(c, T + 1), n):
        total += math.prod(tup[:-1]) ** (-2 * s) * tup[-1] ** (-gamma)
    return total


# --- series ----------------------------------------------------------------------

def test_ap_examples():
    e = ap_series_bound(2, 3, 0.5)
    assert e.upper < 0.02 and e.rhs == pytest.approx(0.375) and e.holds
    e = ap_series_bound(1, 3, 0.5)
    assert e.rhs == pytest.approx(1.5) and e.holds


@pytest.mark.parametrize("a, ell, s", [(2, 3, 0.5), (1, 4, 0.3), (7, 8, 0.26)])
def test_ap_against_oracle(a, ell, s):
    e = ap_series_bound(a, ell, s, 2000)
    assert float(ap_oracle(a, ell, s, 2000)) == pytest.approx(e.lower, rel=1e-12)
    assert e.lower <= float(ap_oracle(a, ell, s, 8000)) <= e.upper


def test_ap_monotone_in_trunc():
    coarse, fine = ap_series_bound(3, 4, 0.4, 100), ap_series_bound(3, 4, 0.4, 5000)
    assert coarse.lower <= fine.lower <= fine.upper <= coarse.upper


def test_ap_scaling_in_a():
    # RHS ~ a^(1 - 2 s ell); the series decays at least that fast
    ell, s = 4, 0.4
    ratios = [ap_series_bound(a, ell, s).upper / ap_series_bound(a, ell, s).rhs for a in (10, 100, 1000)]
    assert ratios[0] >= ratios[1] >= ratios[2]
    slope = math.log(ap_series_bound(1000, ell, s).upper / ap_series_bound(10, ell, s).upper) / math.log(100)
    assert slope <= 1 - 2 * s * ell


def test_ap_preconditions():
    with pytest.raises(ParameterOutOfRange):
        ap_series_bound(1, 1, 0.5)
    with pytest.raises(ParameterOutOfRange):
        ap_series_bound(1, 3, 0.6)


def test_descend_examples():
    e = descend_sum_bound(3, 2, 0.5, 3)
    assert e.upper < 0.05 and e.rhs == pytest.approx(0.25)
    assert descend_sum_bound(2, 2, 0.5, 2).holds


@pytest.mark.parametrize("c, n, s, gamma", [(3, 2, 0.5, 3), (2, 3, 0.3, 3.0), (4, 4, 0.4, 2.6), (2, 2, 0.26, 2.48)])
def test_descend_against_combinations(c, n, s, gamma):
    T = 40
    e = descend_sum_bound(c, n, s, gamma, trunc=T)
    assert e.lower == pytest.approx(descend_oracle(c, n, s, gamma, T), rel=1e-12)
    # the tail covers everything beyond the box
    assert descend_sum_bound(c, n, s, gamma, trunc=4000).lower <= e.upper


def test_descend_nesting():
    c, s, gamma, T = 3, 0.4, 3.0, 60
    three = descend_oracle(c, 3, s, gamma, T)
    layered = sum(a ** (-2 * s) * descend_oracle(a + 1, 2, s, gamma, T) for a in range(c, T + 1))
    assert three == pytest.approx(layered, rel=1e-12)
    assert descend_sum_bound(c, 3, s, gamma, T).lower == pytest.approx(three, rel=1e-12)


def test_descend_iterated_scheme():
    e = descend_sum_bound(3, 7, 0.4, 4.0, trunc=500)
    assert e.lower <= e.upper <= e.rhs


def test_descend_preconditions():
    with pytest.raises(ParameterOutOfRange):
        descend_sum_bound(3, 3, 0.5, 1.5)
    with pytest.raises(ParameterOutOfRange):
        descend_sum_bound(1, 3, 0.5, 3)


@pytest.mark.parametrize("d, t", [(2.0, 2), (1.5, 10), (3.3, 100)])
def test_zeta_tail(d, t):
    assert float(mp.zeta(d, t)) <= zeta_tail(d, t)


# --- certificates ------------------------------------------------------------------

def test_f_certificate_example():
    c = f_certificate(NU, 0.3)
    assert c.accepted
    assert c.constants == {"delta": Fraction(1, 10), "N": 22}
    assert c.bound == pytest.approx(2 * 2 ** (-2.2) / (1 - 2 ** -0.1))


def test_f_certificate_direct_scan():
    # 0.2(n-1) - 2 >= max(0.1 n, 2) first holds for good at n = 22
    n = next(n for n in range(11, 200)
             if all(Fraction(1, 5) * (m - 1) - 2 >= max(Fraction(m, 10), 2) for m in range(n, 400)))
    assert n == 22
    assert not check_f_certificate(NU, 0.3, Fraction(1, 10), 21, 1000).accepted


def test_f_rejects_below_threshold():
    with pytest.raises(NoCertificate):
        f_certificate(NU, 0.24)


def test_f_fast_growth():
    c = f_certificate(parse("nu(n) = n^2"), 0.02, horizon=2000)
    assert c.accepted


@settings(max_examples=15)
@given(st.floats(0.26, 0.49), st.floats(0.0, 1.0))
def test_f_monotone_in_s(s, u):
    s2 = s + (0.5 - s) * u
    assert f_certificate(NU, s, horizon=3000).accepted
    assert f_certificate(NU, s2, horizon=3000).accepted


def test_g_certificate_example():
    c = g_certificate(GAP2N, 0.3)
    assert c.accepted and c.constants == {"delta": 1, "n0": 15}


def test_g_rejects_below_threshold():
    with pytest.raises(NoCertificate):
        g_certificate(GAP2N, 0.24)


@pytest.mark.parametrize("s", [0.05, 0.2, 0.45])
def test_g_beta_one_any_s(s):
    assert g_certificate(parse("sigma(n) = n*(n-1)/2 + 1"), s).accepted


@settings(max_examples=15)
@given(st.floats(0.26, 0.49), st.floats(0.0, 1.0))
def test_g_monotone_in_s(s, u):
    s2 = s + (0.5 - s) * u
    assert g_certificate(GAP2N, s, horizon=3000).accepted
    assert g_certificate(GAP2N, s2, horizon=3000).accepted


def test_h_audit_example():
    rows = h_recursion_audit(GAP2N, 0.3, 15, 10)
    assert len(rows) == 11 and all(r["ok"] and r["bound"] <= 1 for r in rows)
    # the numeric bound is never worse than the closed-form stage bound
    assert all(r["bound"] <= r["lemma_bound"] for r in rows)


def test_h_audit_empty_free_segment():
    rows = h_recursion_audit(parse("sigma(n) = n*(n-1)/2 + 1"), 0.3, 10, 3)
    assert all(r["ell"] == 0 and r["bound"] == 1.0 for r in rows)


def test_h_audit_small_n_fails():
    with pytest.raises(StageBoundViolated) as e:
        h_recursion_audit(GAP2N, 0.26, 3, 5)
    assert e.value.stage == 3
    n0 = g_certificate(GAP2N, 0.26, horizon=2000).constants["n0"]
    assert all(r["ok"] for r in h_recursion_audit(GAP2N, 0.26, n0, 10))


# --- dimension -----------------------------------------------------------------------

@pytest.mark.parametrize("family, g, value", [
    ("F", 1, 0.25), ("F", 3, 0.125), ("F", 0, 0.5), ("F", math.inf, 0.0),
    ("G", 2, 0.25), ("G", 1, 0.0), ("G", math.inf, 0.5),
])
def test_dim_formula(family, g, value):
    assert dim_formula(family, g) == value


def test_dim_formula_errors():
    with pytest.raises(ParameterOutOfRange):
        dim_formula("G", 0.5)
    with pytest.raises(ParameterOutOfRange):
        dim_formula("H", 1)


def test_scan_beta_infinite():
    table = parse("sigma = [" + ", ".join(str(2**n) for n in range(1, 160)) + "]")
    assert dim_upper_scan(table, "G", 0.01) == 0.5


def test_scan_tolerance_guard():
    with pytest.raises(ParameterOutOfRange):
        dim_upper_scan(NU, "F", 1e-4)
