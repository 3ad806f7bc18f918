"""Log-sums over long integer ranges.

The free windows have size #L_i = (2i+1)^t - (2i)^t and the block ranges
grow super-geometrically, so sums of log(2i+1) and log #L_i over [a, b]
are evaluated through log-gamma and Hurwitz-zeta identities rather than
term by term.  Each function returns ``(value, err)`` where ``value`` is an
mpmath number at the working precision set by :func:`precision_for` and
``err`` is an absolute error bound (float).
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

DIRECT_LIMIT = 10**4
_SERIES_TERMS = 12
_EPS = 2.0**-52


def precision_for(b: int) -> int:
    """Decimal digits needed so that lgamma differences near b keep 1e-20 absolute accuracy."""
    return 40 + 2 * len(str(max(int(b), 1)))


def _working_dps(b):
    return mp.workdps(max(mp.mp.dps, precision_for(b)))


def sum_log_odd(a: int, b: int):
    """sum_{i=a}^{b} log(2i+1)."""
    if b < a:
        return mp.mpf(0), 0.0
    n = b - a + 1
    with _working_dps(b):
        v = n * mp.log(2) + mp.loggamma(mp.mpf(b) + mp.mpf(3) / 2) - mp.loggamma(mp.mpf(a) + mp.mpf(1) / 2)
        return v, _round_err(v, b)


def sum_log_even(a: int, b: int):
    """sum_{i=a}^{b} log(2i), a >= 1."""
    if b < a:
        return mp.mpf(0), 0.0
    n = b - a + 1
    with _working_dps(b):
        v = n * mp.log(2) + mp.loggamma(mp.mpf(b) + 1) - mp.loggamma(mp.mpf(a))
        return v, _round_err(v, b)


def _round_err(v, b):
    # lgamma(b) ~ b log b; keep a generous multiple of the working epsilon
    scale = max(abs(float(v)), float(b) * max(math.log(max(b, 2)), 1.0), 1.0)
    return scale * 10.0 ** (-(mp.mp.dps - 5))


@lru_cache(maxsize=None)
def _log_series(t: int):
    """Coefficients c_1..c_K of log((1 - (1-u)^t) / (t u)) = sum c_j u^j."""
    K = _SERIES_TERMS
    # w(u) = (1 - (1-u)^t)/(t u) - 1
    w = [Fraction(0)] * (K + 1)
    for j in range(1, min(t - 1, K) + 1):
        w[j] = Fraction((-1) ** j * math.comb(t, j + 1), t)
    out = [Fraction(0)] * (K + 1)
    power = [Fraction(1)] + [Fraction(0)] * K
    for m in range(1, K + 1):
        nxt = [Fraction(0)] * (K + 1)
        for i, pi in enumerate(power):
            if pi:
                for j in range(1, K + 1 - i):
                    if w[j]:
                        nxt[i + j] += pi * w[j]
        power = nxt
        sign = 1 if m % 2 else -1
        for j in range(K + 1):
            out[j] += sign * power[j] / m
    return tuple(out[1:])


def _window_correction_term(i: int, t: int) -> float:
    """log(1 - (2i/(2i+1))^t), evaluated without cancellation."""
    u = 1.0 / (2 * i + 1)
    return math.log(-math.expm1(t * math.log1p(-u)))


def _odd_power_sum(j: int, a: int, b: int):
    """sum_{i=a}^{b} (2i+1)^(-j)."""
    lo = mp.mpf(a) + mp.mpf(1) / 2
    hi = mp.mpf(b) + mp.mpf(3) / 2
    if j == 1:
        return (mp.digamma(hi) - mp.digamma(lo)) / 2
    return (mp.zeta(j, lo) - mp.zeta(j, hi)) / mp.mpf(2) ** j


def sum_log_window(a: int, b: int, t: int):
    """sum_{i=a}^{b} log((2i+1)^t - (2i)^t), a >= 1.

    Written as t * sum log(2i+1) + sum log(1 - (2i/(2i+1))^t).  The second
    sum is taken term by term below ``split`` and through its power series
    in u = 1/(2i+1) (Hurwitz zeta sums) above it.
    """
    if b < a:
        return mp.mpf(0), 0.0
    with _working_dps(b):
        return _sum_log_window(a, b, t)


def _sum_log_window(a, b, t):
    odd, err = sum_log_odd(a, b)
    total = t * odd
    err *= t
    split = max(DIRECT_LIMIT, 100 * t)
    direct_hi = min(b, split - 1)
    if a <= direct_hi:
        terms = [_window_correction_term(i, t) for i in range(a, direct_hi + 1)]
        total += mp.mpf(math.fsum(terms))
        err += 4 * _EPS * len(terms) * max(abs(x) for x in terms)
    lo = max(a, split)
    if lo <= b:
        n = b - lo + 1
        # log(1 - (1-u)^t) = log t + log u + sum_j c_j u^j
        odd_hi, e2 = sum_log_odd(lo, b)
        corr = n * mp.log(t) - odd_hi
        err += e2
        coeffs = _log_series(t)
        for j, c in enumerate(coeffs, 1):
            if c:
                corr += mp.mpf(c.numerator) / c.denominator * _odd_power_sum(j, lo, b)
        # first omitted order, bounded by its geometric continuation
        u0 = 1.0 / (2 * lo + 1)
        tail = (t * u0) ** (len(coeffs) + 1) * 2.0 / (2 * lo - 1)
        err += tail + _round_err(corr, b)
        total += corr
    return total, err
