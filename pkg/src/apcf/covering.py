"""Upper-bound machinery: series estimates, covering certificates, dimension scans.

Series are estimated as ``truncated sum <= true value <= truncated sum +
tail``, where every tail uses the integral comparison
``sum_{n>=T} n^-d <= (T-1)^(1-d) / (d-1)``.  Sums are evaluated in double
precision with ``math.fsum``; rounding at the 1e-12 relative level is
absorbed by a small inflation of the upper end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ap import growth_constants
from .errors import (
    HorizonExceeded,
    NoCertificate,
    ParameterOutOfRange,
    StageBoundViolated,
)
from .seqspec import SequenceSpec

_ROUND = 1e-12
DEFAULT_HORIZON = 20000
DELTA_GRID = 64


@dataclass(frozen=True)
class SeriesEstimate:
    lower: float
    upper: float
    terms_used: int
    rhs: float
    tail: float = 0.0

    @property
    def holds(self) -> bool:
        return self.upper <= self.rhs


def _check_s(s):
    if not 0 < s <= 0.5:
        raise ParameterOutOfRange(f"s must lie in (0, 1/2], got {s}")


def zeta_tail(d: float, t: int) -> float:
    """Upper bound for sum_{n >= t} n^-d, t >= 2, d > 1."""
    if d <= 1 or t < 2:
        raise ParameterOutOfRange(f"tail bound needs d > 1 and t >= 2, got d={d}, t={t}")
    return (t - 1) ** (1 - d) / (d - 1)


def _inflate(x: float) -> float:
    return x * (1 + _ROUND) + 1e-300


# --- Lemma: AP segments -----------------------------------------------------

def ap_series_rhs(a: int, ell: int, s: float) -> float:
    e = 2 * s * ell
    return a ** (1 - e) * e / (e - 1)


def ap_series_bound(a: int, ell: int, s: float, trunc: int = 10**4) -> SeriesEstimate:
    """Estimate sum_{M>=1} prod_{i=0}^{ell} (a + iM)^(-2s)."""
    _check_s(s)
    if a < 1 or ell < 1:
        raise ParameterOutOfRange("need a >= 1 and ell >= 1")
    if 2 * s * ell <= 1:
        raise ParameterOutOfRange(f"2 s ell = {2 * s * ell} must exceed 1")
    if trunc < 10:
        raise ParameterOutOfRange("trunc must be >= 10")
    M = np.arange(1, trunc + 1, dtype=float)
    logs = np.zeros_like(M)
    for i in range(ell + 1):
        logs += np.log(a + i * M)
    lower = math.fsum(np.exp(-2 * s * logs))
    # prod >= a * ell! * M^ell for every M
    coef = (a * math.factorial(ell)) ** (-2 * s)
    tail = coef * trunc ** (1 - 2 * s * ell) / (2 * s * ell - 1)
    return SeriesEstimate(lower, _inflate(lower + tail), trunc, ap_series_rhs(a, ell, s), tail)


# --- Lemma: descending tuples -----------------------------------------------

def descend_rhs(c: int, n: int, s: float, gamma: float) -> float:
    return (c - 1) ** -(gamma + n * (2 * s - 1) - 2 * s)


def _suffix(x):
    return np.cumsum(x[::-1])[::-1]


def _dp_truncated(c, n, s, gamma, T, last_weight=True):
    """sum over c <= a_1 < ... < a_n <= T of (a_1..a_{n-1})^-2s a_n^-gamma.

    With ``last_weight=False`` every factor is a^-2s (the P_n(T) sums).
    """
    a = np.arange(c, T + 1, dtype=float)
    w = a ** (-2 * s)
    cur = _suffix(a ** (-gamma) if last_weight else w)
    for _ in range(n - 1):
        shifted = np.append(cur[1:], 0.0)
        cur = _suffix(w * shifted)
    return math.fsum([cur[0]]) if len(cur) else 0.0


def _descend_tail(c, n, s, gamma, T):
    """Bound on the part of the sum with a_n > T (recursive on n)."""
    if n == 1:
        return zeta_tail(gamma, T + 1)
    p = _dp_truncated(c, n - 1, s, gamma, T, last_weight=False)
    return (T ** (1 - gamma) * p + _descend_tail(c, n - 1, s, gamma + 2 * s - 1, T)) / (gamma - 1)


def descend_sum_bound(c: int, n: int, s: float, gamma: float, trunc: int = 10**4) -> SeriesEstimate:
    """Estimate sum_{c <= a_1 < ... < a_n} (a_1..a_{n-1})^-2s a_n^-gamma.

    For n <= 4 the truncated box is summed exactly (by dynamic programming
    over the last index) and the remainder a_n > trunc is bounded
    recursively.  For larger n the upper end is the inner-to-outer iterated
    scheme, with the truncated box still giving the lower end.
    """
    _check_s(s)
    if c < 2 or n < 2:
        raise ParameterOutOfRange("need c >= 2 and n >= 2")
    if gamma < 2 - (n - 1) * (2 * s - 1) - 1e-12:
        raise ParameterOutOfRange(f"gamma = {gamma} < 2 - (n-1)(2s-1) = {2 - (n - 1) * (2 * s - 1)}")
    if trunc < max(10, c):
        raise ParameterOutOfRange("trunc must be >= max(10, c)")
    lower = _dp_truncated(c, n, s, gamma, trunc)
    if n <= 4:
        tail = _descend_tail(c, n, s, gamma, trunc)
        upper = lower + tail
    else:
        e = gamma + (n - 1) * (2 * s - 1)
        factor = math.prod(1 / (gamma - 1 + i * (2 * s - 1)) for i in range(n - 1))
        a = np.arange(c, trunc + 1, dtype=float)
        head = math.fsum(a ** (-e))
        tail = zeta_tail(e, trunc + 1)
        upper = factor * (head + tail)
        tail = upper - lower
    return SeriesEstimate(lower, _inflate(upper), trunc, descend_rhs(c, n, s, gamma), tail)


def power_sum_bound(c: int, gamma: float, trunc: int = 10**4) -> SeriesEstimate:
    """sum_{a >= c} a^-gamma; the one-variable case of the descending sum."""
    a = np.arange(c, trunc + 1, dtype=float)
    lower = math.fsum(a ** (-gamma))
    tail = zeta_tail(gamma, trunc + 1)
    return SeriesEstimate(lower, _inflate(lower + tail), trunc, (c - 1) ** (1 - gamma) / (gamma - 1), tail)


# --- certificates -------------------------------------------------------------

@dataclass
class Certificate:
    family: str
    s: Fraction
    constants: dict
    checked_horizon: int
    verdict: str  # accepted | rejected
    reason: str = ""
    slack_at_horizon: float | None = None
    slack_at_half: float | None = None
    bound: float | None = None  # F: covering sum bound, G: max stage contraction
    extra: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _effective_horizon(spec: SequenceSpec, horizon: int, extra: int = 0) -> int:
    h = horizon
    if spec.table is not None:
        h = min(h, len(spec.table) - extra)
    if h < 100:
        raise ParameterOutOfRange(f"horizon must be >= 100 (usable horizon {h})")
    return h


def _f_slack(nu, s, delta, n):
    return 2 * s * (nu(n) - 1) + (2 * s - 1) * (n - 1) - 2 - max(delta * n, 2)


def check_f_certificate(nu: SequenceSpec, s, delta, N: int, horizon: int = DEFAULT_HORIZON) -> Certificate:
    """Exact check of the F covering inequality on [N, horizon].

    Accepted when N > 1/delta, the inequality holds at every n in range and
    the slack at the horizon exceeds the slack at horizon/2.
    """
    s, delta = _as_fraction(s), _as_fraction(delta)
    _check_s(s)
    H = _effective_horizon(nu, horizon)
    consts = {"delta": delta, "N": N}

    def reject(reason, **kw):
        return Certificate("F", s, consts, H, "rejected", reason, **kw)

    if delta <= 0:
        return reject("delta must be positive")
    if N <= 1 / delta:
        return reject(f"N = {N} is not > 1/delta")
    if N > H // 2:
        return reject(f"N = {N} exceeds horizon/2 = {H // 2}")
    for n in range(N, H + 1):
        if _f_slack(nu, s, delta, n) < 0:
            return reject(f"inequality fails at n = {n}")
    hi, half = _f_slack(nu, s, delta, H), _f_slack(nu, s, delta, H // 2)
    if not hi > half:
        return reject("slack is not growing", slack_at_horizon=float(hi), slack_at_half=float(half))
    q = 2.0 ** -float(delta)
    bound = 2 * q**N / (1 - q)
    return Certificate("F", s, consts, H, "accepted", "", float(hi), float(half), bound)


def _delta_window(family_growth, s):
    if math.isinf(family_growth):
        return 4.0
    return 2 * float(s) * (family_growth + 1) - 1


def f_certificate(nu: SequenceSpec, s, horizon: int = DEFAULT_HORIZON) -> Certificate:
    """Search (delta, N) for the F covering inequality at exponent s.

    The first try is the midpoint of the admissible delta window; after that
    a geometric grid of 64 values, keeping the candidate with the smallest N.
    Candidates are screened in floating point and confirmed exactly.
    """
    s = _as_fraction(s)
    _check_s(s)
    H = _effective_horizon(nu, horizon)
    alpha = growth_constants(nu, min(H, 4000)).value
    hi = _delta_window(alpha, s)
    if hi <= 0:
        raise NoCertificate(f"s = {float(s)} is at or below 1/(2(1+alpha)) with alpha ~ {alpha:.4g}")
    n = np.arange(1, H + 1, dtype=float)
    vals = np.array([float(min(nu(k), 10**300)) for k in range(1, H + 1)])
    sf = float(s)
    g = 2 * sf * (vals - 1) + (2 * sf - 1) * (n - 1) - 2

    def first_n(delta):
        bad = np.nonzero(g < np.maximum(delta * n, 2.0) + 1e-9)[0]
        start = bad[-1] + 2 if len(bad) else 1
        return max(int(start), math.floor(1 / delta) + 1)

    if math.isinf(alpha):
        mid = Fraction(hi) / 2
    else:
        mid = (2 * s * (_as_fraction(round(alpha, 9)) + 1) - 1) / 2
    deltas = [mid] + list(np.geomspace(hi * 1e-3, hi * (1 - 1e-6), DELTA_GRID))
    attempt = None
    best = None
    for i, delta in enumerate(deltas):
        N = first_n(float(delta))
        if N > H // 2:
            continue
        if best is None or N < best[1]:
            best = (delta, N)
        if i == 0:
            break
    if best is None:
        raise NoCertificate(f"no (delta, N) works for s = {float(s)} within horizon {H}")
    delta, N = _as_fraction(best[0]), best[1]
    # the float screen works with a margin; settle N exactly
    while N - 1 > 1 / delta and _f_slack(nu, s, delta, N - 1) >= 0:
        N -= 1
    cert = check_f_certificate(nu, s, delta, N, H)
    if not cert.accepted:
        attempt = cert
        cert = check_f_certificate(nu, s, delta, N + 1, H)
    if not cert.accepted:
        raise NoCertificate(f"candidate rejected: {cert.reason}", attempt=attempt or cert)
    cert.extra["alpha"] = alpha
    return cert


def _g_slack(sigma, s, delta, n):
    return (2 * s - 1) * (sigma(n + 1) - sigma(n)) + n - 2 - delta


def check_g_certificate(sigma: SequenceSpec, s, n0: int, delta=1, horizon: int = DEFAULT_HORIZON) -> Certificate:
    """Exact check of the G gap inequality and s*n >= 2 on [n0, horizon]."""
    s, delta = _as_fraction(s), _as_fraction(delta)
    _check_s(s)
    H = _effective_horizon(sigma, horizon, extra=1)
    consts = {"delta": delta, "n0": n0}

    def reject(reason, **kw):
        return Certificate("G", s, consts, H, "rejected", reason, **kw)

    if delta < 1:
        return reject("delta must be >= 1")
    if n0 > H // 2:
        return reject(f"n0 = {n0} exceeds horizon/2 = {H // 2}")
    if s * n0 < 2:
        return reject(f"s * n0 = {float(s * n0)} < 2")
    for n in range(n0, H + 1):
        if _g_slack(sigma, s, delta, n) < 0:
            return reject(f"inequality fails at n = {n}")
    hi, half = _g_slack(sigma, s, delta, H), _g_slack(sigma, s, delta, H // 2)
    if not hi > half:
        return reject("slack is not growing", slack_at_horizon=float(hi), slack_at_half=float(half))
    # per-stage factor I <= n^-(slack + delta) <= n^-delta
    contraction = float(n0) ** -float(_g_slack(sigma, s, 0, n0))
    return Certificate("G", s, consts, H, "accepted", "", float(hi), float(half), contraction)


def g_certificate(sigma: SequenceSpec, s, horizon: int = DEFAULT_HORIZON, delta=1) -> Certificate:
    """Smallest n0 for which the G certificate holds at exponent s."""
    s = _as_fraction(s)
    _check_s(s)
    delta = _as_fraction(delta)
    H = _effective_horizon(sigma, horizon, extra=1)
    start = max(1, math.ceil(2 / s))
    last_bad = None
    for n in range(H, start - 1, -1):
        if _g_slack(sigma, s, delta, n) < 0:
            last_bad = n
            break
    n0 = start if last_bad is None else last_bad + 1
    cert = check_g_certificate(sigma, s, n0, delta, H)
    if not cert.accepted:
        raise NoCertificate(f"s = {float(s)}: {cert.reason}", attempt=cert)
    return cert


def certificate(family: str, spec: SequenceSpec, s, horizon: int = DEFAULT_HORIZON) -> Certificate:
    if family == "F":
        return f_certificate(spec, s, horizon)
    if family == "G":
        return g_certificate(spec, s, horizon)
    raise ParameterOutOfRange(f"family must be F or G, got {family!r}")


# --- H-recursion audit --------------------------------------------------------

def h_recursion_audit(sigma: SequenceSpec, s, j: int, stages: int, trunc: int = 4000) -> list[dict]:
    """Numerically bound the stage factor I for n = j .. j+stages.

    I <= 2sn / ((2sn-1)(2sn-2)) * D, where D is the descending sum over the
    l_{n+1} = sigma_{n+1} - sigma_n - n free digits with c = n+1 and
    gamma = 2sn + 2s - 2.  An empty free segment gives the trivial bound 1.
    Raises StageBoundViolated when a stage bound exceeds 1 or a
    precondition of the two lemmas fails.
    """
    sf = float(s)
    _check_s(sf)
    rows = []
    for n in range(j, j + stages + 1):
        try:
            gap = sigma(n + 1) - sigma(n)
        except HorizonExceeded:
            break
        ell = gap - n
        gamma = 2 * sf * n + 2 * sf - 2
        lemma = float(n) ** -float((2 * _as_fraction(s) - 1) * gap + n - 2)
        row = {"n": n, "ell": ell, "gamma": gamma, "lemma_bound": lemma}
        if sf * n < 2:
            row.update(bound=None, ok=False, reason="s*n < 2")
            rows.append(row)
            raise StageBoundViolated(f"stage n={n}: s*n < 2", stage=n, report=rows)
        if ell < 0:
            raise StageBoundViolated(f"stage n={n}: negative free segment", stage=n, report=rows)
        if ell == 0:
            row.update(bound=1.0, ok=True, reason="empty free segment")
            rows.append(row)
            continue
        factor = 2 * sf * n / ((2 * sf * n - 1) * (2 * sf * n - 2))
        tr = max(trunc, 10 * (n + 1))
        try:
            if ell == 1:
                est = power_sum_bound(n + 1, gamma, tr)
            else:
                est = descend_sum_bound(n + 1, ell, sf, gamma, tr)
        except ParameterOutOfRange as e:
            row.update(bound=None, ok=False, reason=str(e))
            rows.append(row)
            raise StageBoundViolated(f"stage n={n}: {e}", stage=n, report=rows) from None
        bound = factor * est.upper
        row.update(bound=bound, ok=bound <= 1, reason="", truncation=tr, tail=est.tail)
        rows.append(row)
        if bound > 1:
            raise StageBoundViolated(f"stage n={n}: factor bound {bound:.6g} > 1", stage=n, report=rows)
    return rows


# --- dimension ----------------------------------------------------------------

def dim_formula(family: str, growth: float) -> float:
    """1/(2(1+alpha)) for F, (beta-1)/(2 beta) for G; infinite growth allowed."""
    if family == "F":
        if growth < 0:
            raise ParameterOutOfRange(f"alpha must be >= 0, got {growth}")
        return 0.0 if math.isinf(growth) else 1 / (2 * (1 + growth))
    if family == "G":
        if growth < 1:
            raise ParameterOutOfRange(f"beta must be >= 1, got {growth}")
        return 0.5 if math.isinf(growth) else (growth - 1) / (2 * growth)
    raise ParameterOutOfRange(f"family must be F or G, got {family!r}")


@dataclass
class ScanResult:
    value: float
    certificate: Certificate
    evaluations: list


def dim_upper_scan(spec: SequenceSpec, family: str, tol: float = 5e-3,
                   horizon: int = DEFAULT_HORIZON, full: bool = False):
    """Smallest s in (0, 1/2] (to within tol) admitting an accepted certificate."""
    if tol < 1e-3:
        raise ParameterOutOfRange("tol must be >= 1e-3")

    def ok(s):
        try:
            return certificate(family, spec, s, horizon)
        except NoCertificate:
            return None

    hi = Fraction(1, 2)
    best = ok(hi)
    if best is None:
        raise NoCertificate(f"no certificate even at s = 1/2 for {spec.canonical()}")
    lo = Fraction(0)
    evals = [(0.5, True)]
    while hi - lo > tol:
        mid = (lo + hi) / 2
        c = ok(mid)
        evals.append((float(mid), c is not None))
        if c is not None:
            hi, best = mid, c
        else:
            lo = mid
    res = ScanResult(float(hi), best, evals)
    return res if full else res.value
