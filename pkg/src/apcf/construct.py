"""Cantor-type subsets Lambda_t(F), Lambda_t(G) and their cylinder measures.

Free positions n (in some V_k) take digits from L_n = [(2n)^t, (2n+1)^t);
positions in W_k continue the digit at max V_k with difference 1.  The
measure of an admissible cylinder is the reciprocal product of #L_i over
the free positions i it fixes.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Sequence

import mpmath as mp

from . import logsum
from .ap import BlockPartition, blocks_for_F, blocks_for_G, default_schedule, growth_constants
from .cf import check_digits, cylinder_lengths_den, last_two, log_fraction, log_int, _interval
from .errors import (
    HorizonExceeded,
    NeighborhoodEscape,
    ParameterOutOfRange,
    RadiusOutOfRange,
    ScheduleInfeasible,
    ZeroMeasure,
)
from .seqspec import SequenceSpec

# ratio_series refuses blocks reaching beyond this position
MAX_POSITION = 10**200


@dataclass(frozen=True)
class LambdaParams:
    t: int
    family: str
    partition: BlockPartition
    spec: SequenceSpec
    schedule: tuple | None = None

    def __post_init__(self):
        if self.t < 2:
            raise ParameterOutOfRange(f"t must be >= 2, got {self.t}")
        if self.family not in ("F", "G"):
            raise ParameterOutOfRange(f"family must be F or G, got {self.family!r}")

    def window(self, n: int) -> tuple[int, int]:
        """Free window [lo, hi) for position n (ignores the block structure)."""
        return (2 * n) ** self.t, (2 * n + 1) ** self.t

    def window_size(self, n: int) -> int:
        return (2 * n + 1) ** self.t - (2 * n) ** self.t


def make_params(family: str, spec: SequenceSpec, t: int, cover: int = 1,
                schedule: Sequence[int] | None = None, k_min: int = 1) -> LambdaParams:
    """Build Lambda_t parameters whose partition reaches position ``cover``
    and has at least ``k_min`` V-blocks."""
    if family == "F":
        if spec.kind != "nu":
            raise ParameterOutOfRange("family F needs a nu sequence")
        if schedule is None:
            sched = default_schedule(spec, cover)
            # one block past the cover so that B_k exists for every covered k
            target = max(k_min, len(sched) + 1)
            while len(sched) < target:
                nk = sched[-1]
                sched.append(max(nk + spec(nk) + 1, nk * nk))
        else:
            sched = list(schedule)
        part = blocks_for_F(spec, sched)
        if part.last_position < cover:
            raise HorizonExceeded(f"schedule covers positions up to {part.last_position} < {cover}")
        return LambdaParams(t, "F", part, spec, tuple(sched))
    if family == "G":
        if spec.kind != "sigma":
            raise ParameterOutOfRange("family G needs a sigma sequence")
        k = 1
        while spec(k) + k - 1 < cover:
            k += 1
        return LambdaParams(t, "G", blocks_for_G(spec, max(k + 1, k_min)), spec, None)
    raise ParameterOutOfRange(f"family must be F or G, got {family!r}")


@dataclass(frozen=True)
class DigitRule:
    """Either a free window [lo, hi) or a forced continuation of an anchor."""

    free: bool
    lo: int = 0
    hi: int = 0
    anchor: int = 0
    offset: int = 0

    def forced_value(self, digits: Sequence[int]) -> int:
        return digits[self.anchor - 1] + self.offset


def digit_window(params: LambdaParams, n: int) -> DigitRule:
    # rules are pure functions of (params, n); cache them on the instance
    cache = params.__dict__.setdefault("_rules", {})
    rule = cache.get(n)
    if rule is not None:
        return rule
    if n < 1:
        raise ParameterOutOfRange("positions start at 1")
    k, kind = params.partition.locate(n)
    if kind == "V":
        lo, hi = params.window(n)
        rule = DigitRule(True, lo, hi)
    else:
        anchor = params.partition.anchor(k)
        rule = DigitRule(False, anchor=anchor, offset=n - anchor)
    if n <= 10**5:
        cache[n] = rule
    return rule


def sample_point(params: LambdaParams, seed: int, depth: int, mode: str = "random") -> tuple:
    """Digits a_1..a_depth of a point of Lambda_t.

    ``mode="random"`` draws each free digit uniformly from its window with a
    seeded generator; ``mode="min"`` takes the smallest digit of each window.
    """
    if depth < 1:
        raise ParameterOutOfRange("depth must be >= 1")
    if mode not in ("random", "min"):
        raise ParameterOutOfRange(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    out = []
    for n in range(1, depth + 1):
        rule = digit_window(params, n)
        if rule.free:
            out.append(rule.lo if mode == "min" else rng.randrange(rule.lo, rule.hi))
        else:
            out.append(rule.forced_value(out))
    return tuple(out)


def mu_denominator(params: LambdaParams, digits: Sequence[int]) -> int:
    """1/mu(I_n(digits)), or 0 when the cylinder misses Lambda_t."""
    den = 1
    for n, a in enumerate(digits, 1):
        rule = digit_window(params, n)
        if rule.free:
            if not rule.lo <= a < rule.hi:
                return 0
            den *= rule.hi - rule.lo
        elif a != rule.forced_value(digits):
            return 0
    return den


def mu_cylinder(params: LambdaParams, digits: Sequence[int]) -> Fraction:
    d = check_digits(digits)
    den = mu_denominator(params, d)
    return Fraction(1, den) if den else Fraction(0)


def mu_additivity_check(params: LambdaParams, digits: Sequence[int], margin: int = 2) -> dict:
    """Parent measure against the exact sum over all next digits.

    Children are every digit of the next free window (or the forced digit)
    plus ``margin`` digits on each side, which must carry zero mass.
    The empty prefix checks normalisation of the depth-1 cylinders.
    """
    d = tuple(digits)
    parent = Fraction(1) if not d else mu_cylinder(params, d)
    n = len(d) + 1
    rule = digit_window(params, n)
    if rule.free:
        lo, hi = rule.lo, rule.hi
    else:
        lo = hi = rule.forced_value(d)
        hi += 1
    children = range(max(1, lo - margin), hi + margin)
    total = sum((mu_cylinder(params, d + (a,)) for a in children), Fraction(0))
    return {"ok": total == parent, "parent": parent, "children_sum": total,
            "n_children": len(children), "free": rule.free}


def boundary_chain_ok(params: LambdaParams, digits: Sequence[int]) -> bool:
    """a_{min W_k} + #W_k - 1 < (2 min V_{k+1})^t at every boundary inside the prefix."""
    part = params.partition
    for k in range(1, part.k_max):
        w, v_next = part.W[k - 1], part.V[k]
        if v_next.lo > len(digits):
            break
        if w.size == 0:
            continue
        if not digits[w.lo - 1] + w.size - 1 < (2 * v_next.lo) ** params.t:
            return False
    return True


@dataclass
class RatioSeries:
    family: str
    t: int
    k: list
    A: list
    B: list
    A_err: list
    B_err: list
    limit_A: float
    limit_B: float
    growth: float
    diagnostics: list = field(default_factory=list)

    def bound(self, k: int) -> float:
        return min(self.A[k - 1], self.B[k - 1])

    def rows(self) -> list[dict]:
        out = []
        for i, k in enumerate(self.k):
            row = {"k": k, "A": self.A[i], "B": self.B[i], "A_err": self.A_err[i],
                   "B_err": self.B_err[i], "min": min(self.A[i], self.B[i]),
                   "limit_A": self.limit_A, "limit_B": self.limit_B}
            if self.diagnostics:
                row.update(self.diagnostics[i])
            out.append(row)
        return out


def _growth(params: LambdaParams) -> float:
    spec = params.spec
    h = 2000 if spec.table is None else min(2000, len(spec.table) - 1)
    if h < 10:
        return math.nan
    return growth_constants(spec, h).value


def _b_value(a: int, b: int, t: int):
    """inf over n in [a, b] of sum_{i=a}^{n} log #L_i / (2t sum log(2i+1)).

    Per-term ratios log #L_i / (2t log(2i+1)) decrease in i, so once past
    the directly scanned prefix the running quotient can only decrease;
    the infimum is then the minimum of the scanned prefix and the full block.
    """
    m = min(b, a + logsum.DIRECT_LIMIT - 1)
    num = list(accumulate(log_int(n2) for n2 in ((2 * i + 1) ** t - (2 * i) ** t for i in range(a, m + 1))))
    den = list(accumulate(2 * t * math.log(2 * i + 1) for i in range(a, m + 1)))
    best = min(x / y for x, y in zip(num, den))
    err = 8 * _EPS * (m - a + 1)
    if m < b:
        sn, en = logsum.sum_log_window(a, b, t)
        sd, ed = logsum.sum_log_odd(a, b)
        full = float(sn / (2 * t * sd))
        best = min(best, full)
        err = max(err, (en + full * 2 * t * ed) / float(2 * t * sd))
    return best, err


_EPS = 2.0**-52


def ratio_series(params: LambdaParams, k_max: int) -> RatioSeries:
    """A_k and B_k for k = 1..k_max together with their theoretical limits."""
    if k_max < 1:
        raise ParameterOutOfRange("k_max must be >= 1")
    part = params.partition
    if part.k_max < k_max + 1:
        raise ScheduleInfeasible(
            f"partition has {part.k_max} V-blocks; B_{k_max} needs {k_max + 1}"
        )
    if part.V[k_max].hi > MAX_POSITION:
        raise ScheduleInfeasible(f"block V_{k_max + 1} reaches beyond {MAX_POSITION:.0e}")
    t = params.t
    growth = _growth(params)
    if params.family == "F":
        limit_A = (t - 1) / (2 * t * (1 + growth)) if math.isfinite(growth) else 0.0
    elif math.isfinite(growth):
        limit_A = (t - 1) * (growth - 1) / (2 * t * growth)
    else:
        limit_A = (t - 1) / (2 * t)
    limit_B = (t - 1) / (2 * t)

    ks, A, B, Aerr, Berr, diag = [], [], [], [], [], []
    with mp.workdps(logsum.precision_for(part.V[k_max].hi)):
        num = mp.mpf(0)
        odd = mp.mpf(0)
        even = mp.mpf(0)
        ap = mp.mpf(0)
        num_err = den_err = 0.0
        for k in range(1, k_max + 1):
            v = part.V[k - 1]
            s, e = logsum.sum_log_window(v.lo, v.hi, t)
            num += s
            num_err += e
            s, e = logsum.sum_log_odd(v.lo, v.hi)
            odd += s
            den_err += 2 * t * e
            s, _ = logsum.sum_log_even(v.lo, v.hi)
            even += s
            length = part.ap_lengths[k - 1]
            anchor = part.anchor(k)
            ap += (length - 1) * mp.log(mp.mpf((2 * anchor + 1) ** t + length))
            den = mp.log(2) + 2 * (t * odd + ap)
            a_k = num / den
            ks.append(k)
            A.append(float(a_k))
            Aerr.append(float((num_err + abs(a_k) * den_err) / den) + 1e-15)
            b_k, b_err = _b_value(part.V[k].lo, part.V[k].hi, t)
            B.append(b_k)
            Berr.append(b_err)
            if params.family == "F":
                nk = anchor
                scale = nk * mp.log(nk) if nk > 1 else mp.mpf(1)
                lg = mp.log(nk) if nk > 1 else mp.mpf(1)
                diag.append({
                    "frac_even": float(even / scale),
                    "frac_odd": float(odd / scale),
                    "frac_ap": float(ap / (t * length * lg)),
                })
    return RatioSeries(params.family, t, ks, A, B, Aerr, Berr, limit_A, limit_B, growth, diag)


def bound_index(params: LambdaParams, n: int) -> int:
    """k with anchor_k < n <= anchor_{k+1}; 0 when n <= anchor_1."""
    k, kind = params.partition.locate(n)
    if kind == "W":
        return k
    return k - 1


def local_dim_ratio(params: LambdaParams, digits: Sequence[int], n: int) -> float:
    """log mu(I_n) / log |I_n| from exact integers."""
    d = check_digits(digits)
    if not 1 <= n <= len(d):
        raise ParameterOutOfRange(f"n must be in 1..{len(d)}")
    den_mu = mu_denominator(params, d[:n])
    if den_mu == 0:
        raise ZeroMeasure(f"cylinder of depth {n} misses Lambda_t")
    _, q, _, qp = last_two(d[:n])
    return log_int(den_mu) / log_int(q * (q + qp))


def local_dim_rows(params: LambdaParams, digits: Sequence[int], series: RatioSeries | None = None,
                   tol: float = 1e-6) -> list[dict]:
    """Ratio at every depth of ``digits`` next to the bound min(A_k, B_k)."""
    d = check_digits(digits)
    lens = cylinder_lengths_den(d)
    k_need = max(bound_index(params, len(d)), 1)
    if series is None or len(series.k) < k_need:
        series = ratio_series(params, k_need)
    rows = []
    log_mu = 0.0
    terms = []
    for n, a in enumerate(d, 1):
        rule = digit_window(params, n)
        if rule.free:
            if not rule.lo <= a < rule.hi:
                raise ZeroMeasure(f"digit a_{n} = {a} is outside its window")
            terms.append(log_int(rule.hi - rule.lo))
            log_mu = math.fsum(terms)
        elif a != rule.forced_value(d):
            raise ZeroMeasure(f"digit a_{n} = {a} breaks the forced AP")
        ratio = log_mu / log_int(lens[n - 1])
        k = bound_index(params, n)
        bound = series.bound(k) if k >= 1 else None
        rows.append({"n": n, "ratio": ratio, "k": k, "bound": bound,
                     "ok": None if bound is None else ratio >= bound - tol})
    return rows


def _neighbor(prefix_pq, j, n):
    p1, q1, p2, q2 = prefix_pq
    p, q = j * p1 + p2, j * q1 + q2
    return _interval(p, q, p1, q1, n)


def _hits(iv, L, R) -> bool:
    if iv.closed_left:
        return L < iv.hi and R >= iv.lo
    return L <= iv.hi and R > iv.lo


def neighbor_count_check(digits: Sequence[int], r) -> int:
    """Number of depth-n cylinders meeting the closed ball B(x, r).

    x is the midpoint of I_N(digits), N = len(digits), and n is the depth
    with |I_{n+1}| <= r < |I_n| (n + 1 <= N).  Only cylinders inside the
    parent I_{n-1} are enumerated; if the ball leaves the parent, or
    contains its accumulation point, :class:`NeighborhoodEscape` is raised.
    """
    d = check_digits(digits)
    r = Fraction(r)
    N = len(d)
    if N < 2:
        raise RadiusOutOfRange("need at least two digits to bracket a radius")
    lens = [Fraction(1, x) for x in cylinder_lengths_den(d)]
    n = None
    for k in range(1, N):
        if lens[k] <= r < lens[k - 1]:
            n = k
            break
    if n is None:
        raise RadiusOutOfRange(f"no n < {N} with |I_(n+1)| <= r < |I_n|")
    if d[n - 1] < 2:
        raise ParameterOutOfRange(f"a_{n} = {d[n - 1]} < 2")
    x = _interval(*last_two(d), N).midpoint()
    L, R = max(x - r, Fraction(0)), min(x + r, Fraction(1))
    parent = last_two(d[:n - 1])
    p1, q1, p2, q2 = parent
    accumulation = Fraction(p1, q1)
    if L <= accumulation <= R:
        raise NeighborhoodEscape("ball contains an accumulation point of depth-n cylinders")
    count = 0
    j = d[n - 1]
    while j >= 1 and _hits(_neighbor(parent, j, n), L, R):
        count += 1
        j -= 1
    if j == 0:
        # all cylinders down to j = 1 are hit; the ball must not cross the parent edge
        edge = Fraction(p1 + p2, q1 + q2)
        escaped = (L <= edge and edge > 0) if x > edge else (R >= edge and edge < 1)
        if escaped:
            raise NeighborhoodEscape("ball leaves the parent cylinder")
    j = d[n - 1] + 1
    while _hits(_neighbor(parent, j, n), L, R):
        count += 1
        j += 1
    return count


def length_ratio_check(digits: Sequence[int], horizon: int) -> list[float]:
    """log|I_n| / log|I_{n+1}| for n = 1..horizon."""
    d = check_digits(digits)
    if len(d) < horizon + 1:
        raise ParameterOutOfRange(f"need {horizon + 1} digits, got {len(d)}")
    logs = [log_int(x) for x in cylinder_lengths_den(d[:horizon + 1])]
    return [logs[i] / logs[i + 1] for i in range(horizon)]
