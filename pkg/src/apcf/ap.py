"""Arithmetic progressions in digit sequences and the V/W block partitions.

Positions are 1-based throughout, matching digit indices a_1, a_2, ...
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cf import is_strictly_increasing
from .errors import (
    HorizonExceeded,
    NotStrictlyIncreasing,
    ScheduleTooDense,
    SpecConstraintViolated,
)
from .seqspec import SequenceSpec


@dataclass(frozen=True)
class APSegment:
    start_index: int
    length: int
    first_value: int
    difference: int

    @property
    def end_index(self) -> int:
        return self.start_index + self.length - 1


@dataclass(frozen=True)
class Block:
    """Integer interval [lo, hi]; empty when hi == lo - 1."""

    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, n) -> bool:
        return self.lo <= n <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class BlockPartition:
    """Alternating free (V) and AP (W) blocks V_1, W_1, V_2, W_2, ...

    ``anchors[k-1]`` is the position whose digit the AP block W_k continues
    (``max V_k``).  ``ap_lengths[k-1]`` is the AP length at stage k,
    i.e. ``#W_k + 1``.
    """

    family: str
    V: tuple
    W: tuple
    ap_lengths: tuple
    _starts: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_starts", tuple(v.lo for v in self.V))

    @property
    def k_max(self) -> int:
        return len(self.V)

    @property
    def last_position(self) -> int:
        return self.W[-1].hi

    def anchor(self, k: int) -> int:
        return self.V[k - 1].hi

    def locate(self, n: int) -> tuple[int, str]:
        """Return (k, 'V' or 'W') for the block containing position n."""
        if n < 1 or n > self.last_position:
            raise HorizonExceeded(f"position {n} is outside the partition (1..{self.last_position})")
        k = bisect.bisect_right(self._starts, n)
        if n in self.V[k - 1]:
            return k, "V"
        return k, "W"

    def blocks(self) -> list[Block]:
        out = []
        for v, w in zip(self.V, self.W):
            out += [v, w]
        return out

    def is_contiguous(self) -> bool:
        expect = 1
        for b in self.blocks():
            if b.lo != expect or b.hi < b.lo - 1:
                return False
            expect = b.hi + 1
        return all(v.size >= 1 for v in self.V)

    def summary(self, limit: int = 8) -> list[dict]:
        rows = []
        for k, (v, w) in enumerate(zip(self.V, self.W), 1):
            if k > limit:
                break
            rows.append({"k": k, "V": [v.lo, v.hi], "W": [w.lo, w.hi] if w.size else []})
        return rows


def is_ap(window: Sequence[int]) -> int | None:
    """Common difference M >= 1 of the window, or None.

    Every strictly increasing pair is an AP.  A single term is an AP for
    any M; 1 is reported for it.
    """
    w = list(window)
    if not w:
        raise ValueError("empty window")
    if len(w) == 1:
        return 1
    m = w[1] - w[0]
    if m < 1:
        return None
    for a, b in zip(w[1:], w[2:]):
        if b - a != m:
            return None
    return m


def find_ap_runs(digits: Sequence[int], min_len: int = 3) -> list[APSegment]:
    """All maximal runs of constant positive difference with length >= min_len.

    Two maximal runs can share one boundary digit (e.g. 1,2,3,5,7) but
    never more.
    """
    if min_len < 3:
        raise ValueError("min_len must be >= 3")
    d = list(digits)
    runs = []
    i = 0
    while i < len(d) - 1:
        m = d[i + 1] - d[i]
        j = i + 1
        while j + 1 < len(d) and d[j + 1] - d[j] == m:
            j += 1
        if m >= 1 and j - i + 1 >= min_len:
            runs.append(APSegment(i + 1, j - i + 1, d[i], m))
        i = j
    return runs


@dataclass
class MembershipReport:
    verdict: str  # consistent | witnessed | violated
    witnesses: list = field(default_factory=list)
    first_violation: int | None = None
    checked: int = 0


def check_F_membership(digits: Sequence[int], nu: SequenceSpec) -> MembershipReport:
    """Positions n where a_n..a_{n+nu_n-1} lies inside the prefix and is an AP.

    Finite prefixes can only witness F-membership, never refute it.
    """
    d = list(digits)
    if not is_strictly_increasing(d):
        raise NotStrictlyIncreasing("F-membership needs strictly increasing digits")
    wit = []
    checked = 0
    for n in range(1, len(d) + 1):
        try:
            length = nu(n)
        except HorizonExceeded:
            break
        end = n + length - 1
        if end > len(d):
            # nu is increasing, so later windows overrun too
            break
        checked += 1
        m = is_ap(d[n - 1:end])
        if m is not None:
            wit.append((n, APSegment(n, length, d[n - 1], m)))
    return MembershipReport("witnessed" if wit else "consistent", wit, None, checked)


def _check_sigma_gaps(sigma: SequenceSpec, upto: int):
    prev = sigma(1)
    for n in range(1, upto):
        nxt = sigma(n + 1)
        if nxt - prev < n:
            raise SpecConstraintViolated(
                f"sigma({n + 1}) - sigma({n}) = {nxt - prev} < {n}"
            )
        prev = nxt


def check_G_membership(digits: Sequence[int], sigma: SequenceSpec, n_start: int = 1) -> MembershipReport:
    """First n >= n_start whose window a_{sigma_n}..a_{sigma_n+n-1} is not an AP."""
    if n_start < 1:
        raise ValueError("n_start must be >= 1")
    d = list(digits)
    if not is_strictly_increasing(d):
        raise NotStrictlyIncreasing("G-membership needs strictly increasing digits")
    depth = len(d)
    # windows that fit: sigma_n + n - 1 <= depth
    last = 0
    n = 1
    while True:
        try:
            s = sigma(n)
        except HorizonExceeded:
            break
        if s + n - 1 > depth:
            break
        last = n
        n += 1
    if last >= 2:
        _check_sigma_gaps(sigma, last)
    wit = []
    checked = 0
    for n in range(n_start, last + 1):
        s = sigma(n)
        checked += 1
        m = is_ap(d[s - 1:s + n - 1])
        if m is None:
            return MembershipReport("violated", wit, n, checked)
        wit.append((n, APSegment(s, n, d[s - 1], m)))
    return MembershipReport("consistent", wit, None, checked)


def default_schedule(nu: SequenceSpec, cover: int, start: int = 3) -> list[int]:
    """n_1 = start, n_{k+1} = max(n_k + nu(n_k) + 1, n_k^2), until n_k >= cover."""
    sched = [start]
    while sched[-1] < cover:
        nk = sched[-1]
        sched.append(max(nk + nu(nk) + 1, nk * nk))
    return sched


def blocks_for_F(nu: SequenceSpec, schedule: Sequence[int]) -> BlockPartition:
    sched = list(schedule)
    if not sched:
        raise ValueError("schedule is empty")
    V, W, lengths = [], [], []
    start = 1  # n_0 + nu(0)
    prev = None
    for nk in sched:
        if prev is None and nk < 1:
            raise ScheduleTooDense(f"n_1 = {nk} < 1")
        if prev is not None and start >= nk:
            raise ScheduleTooDense(
                f"n_k + nu(n_k) = {start} >= n_(k+1) = {nk} after n_k = {prev}"
            )
        nuk = nu(nk)
        V.append(Block(start, nk))
        W.append(Block(nk + 1, nk + nuk - 1))
        lengths.append(nuk)
        start = nk + nuk
        prev = nk
    return BlockPartition("F", tuple(V), tuple(W), tuple(lengths))


def blocks_for_G(sigma: SequenceSpec, k_max: int) -> BlockPartition:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    V, W, lengths = [], [], []
    prev = 1  # sigma(0)
    for k in range(1, k_max + 1):
        sk = sigma(k)
        if k >= 2 and sk - prev < k - 1:
            raise SpecConstraintViolated(f"sigma({k}) - sigma({k - 1}) = {sk - prev} < {k - 1}")
        lo = prev + k - 1
        if sk < lo:
            raise SpecConstraintViolated(f"V_{k} would be empty (sigma({k}) = {sk})")
        V.append(Block(lo, sk))
        W.append(Block(sk + 1, sk + k - 1))
        lengths.append(k)
        prev = sk
    return BlockPartition("G", tuple(V), tuple(W), tuple(lengths))


@dataclass
class GrowthEstimate:
    kind: str
    value: float          # alpha (liminf nu_n/n) or beta (lim gap/n); inf when divergent
    last: float           # last raw ratio
    trend: list           # tail infimum (nu) or raw ratio (sigma), indexed from n = 1
    converged: bool
    divergent: bool


def _window_min(values):
    """out[i] = min(values[i .. min(2i+1, len-1)]), i.e. the window [n, 2n] for n = i+1."""
    from collections import deque

    out = [None] * len(values)
    dq = deque()
    hi = -1
    for i in range(len(values)):
        end = min(2 * i + 1, len(values) - 1)
        while hi < end:
            hi += 1
            while dq and values[dq[-1]] >= values[hi]:
                dq.pop()
            dq.append(hi)
        while dq[0] < i:
            dq.popleft()
        out[i] = values[dq[0]]
    return out


def growth_constants(spec: SequenceSpec, horizon: int) -> GrowthEstimate:
    """Estimate alpha = liminf nu_n/n or beta = lim (sigma_{n+1}-sigma_n)/n.

    For nu the trend is the windowed infimum of nu_j/j over j in [n, 2n].
    The estimate fits r ~ c + b/n through the trend at horizon/4 and
    horizon/2, which is exact for ratios of that shape.  ``divergent`` is
    set when the trend is still growing by more than 5% across that span;
    ``converged`` when the raw ratio moves by at most 1e-3 over the last
    tenth of the range.
    """
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    if spec.kind == "nu":
        ratios = [Fraction(spec(n), n) for n in range(1, horizon + 1)]
        trend = _window_min(ratios)
    else:
        vals = spec.eval_range(1, horizon + 1)
        ratios = [Fraction(vals[n] - vals[n - 1], n) for n in range(1, horizon + 1)]
        trend = ratios
    n1, n2 = horizon // 4, horizon // 2
    t1, t2 = trend[n1 - 1], trend[n2 - 1]
    tail = [float(r) for r in ratios[horizon - max(horizon // 10, 2):]]
    converged = max(tail) - min(tail) <= 1e-3
    divergent = t1 > 0 and t2 >= Fraction(105, 100) * t1 and ratios[-1] >= t2
    if divergent:
        est = math.inf
    else:
        est = float((n2 * t2 - n1 * t1) / (n2 - n1))
    return GrowthEstimate(spec.kind, est, float(ratios[-1]), [float(x) for x in trend],
                          converged and not divergent, divergent)
