"""Exact regular continued fractions.

Digit sequences are plain tuples of Python ints (arbitrary precision).
Everything here is integer or ``Fraction`` arithmetic; the only floating
point is in :func:`log_int` / :func:`log_fraction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import EmptySequence, IndexOutOfRange, NonPositiveDigit, OutOfDomain

LOG2 = math.log(2.0)


class Convergent(NamedTuple):
    p: int
    q: int
    index: int


@dataclass(frozen=True)
class FundInterval:
    """The cylinder I_n(a_1..a_n).

    Odd depth gives ``(lo, hi]``, even depth gives ``[lo, hi)``.
    """

    lo: Fraction
    hi: Fraction
    depth: int
    closed_left: bool

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        if self.closed_left:
            return self.lo <= x < self.hi
        return self.lo < x <= self.hi

    def contains_interval(self, other: "FundInterval") -> bool:
        """Set containment, honouring which endpoints are included."""
        if other.lo < self.lo or other.hi > self.hi:
            return False
        if other.lo == self.lo and other.closed_left and not self.closed_left:
            return False
        if other.hi == self.hi and not other.closed_left and self.closed_left:
            return False
        return True

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


def check_digits(digits: Sequence[int]) -> tuple:
    d = tuple(digits)
    if not d:
        raise EmptySequence("digit sequence is empty")
    for i, a in enumerate(d, 1):
        if a < 1:
            raise NonPositiveDigit(f"digit a_{i} = {a} < 1")
    return d


def is_strictly_increasing(digits: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(digits, digits[1:]))


def _pq(digits):
    """Yield (p_i, q_i) for i = 1..n from the double recursion."""
    p2, p1 = 1, 0  # p_{-1}, p_0
    q2, q1 = 0, 1  # q_{-1}, q_0
    for a in digits:
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        yield p1, q1


def convergents(digits: Sequence[int]) -> list[Convergent]:
    d = check_digits(digits)
    return [Convergent(p, q, i) for i, (p, q) in enumerate(_pq(d), 1)]


def last_two(digits: Sequence[int]) -> tuple[int, int, int, int]:
    """Return (p_n, q_n, p_{n-1}, q_{n-1}) without building the full list.

    An empty sequence gives the seeds (p_0, q_0, p_{-1}, q_{-1}).
    """
    p2, p1, q2, q1 = 1, 0, 0, 1
    for a in digits:
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
    return p1, q1, p2, q2


def q_of(digits: Sequence[int]) -> int:
    """q_n(a_1..a_n); the empty sequence gives q_0 = 1."""
    return last_two(digits)[1]


def value(digits: Sequence[int]) -> Fraction:
    d = check_digits(digits)
    p, q, _, _ = last_two(d)
    return Fraction(p, q)


def _interval(p, q, pp, qp, n) -> FundInterval:
    a = Fraction(p, q)
    b = Fraction(p + pp, q + qp)
    if n % 2 == 0:
        return FundInterval(a, b, n, True)
    return FundInterval(b, a, n, False)


def fundamental_interval(digits: Sequence[int]) -> FundInterval:
    d = check_digits(digits)
    p, q, pp, qp = last_two(d)
    return _interval(p, q, pp, qp, len(d))


def interval_length_den(digits: Sequence[int]) -> int:
    """Denominator of |I_n|, i.e. q_n (q_n + q_{n-1}); |I_n| = 1 / this."""
    _, q, _, qp = last_two(check_digits(digits))
    return q * (q + qp)


def cylinder_lengths_den(digits: Sequence[int]) -> list[int]:
    """q_i (q_i + q_{i-1}) for i = 1..n, in one pass."""
    out = []
    q2, q1 = 0, 1
    for a in check_digits(digits):
        q2, q1 = q1, a * q1 + q2
        out.append(q1 * (q1 + q2))
    return out


def gauss_map(x) -> Fraction:
    x = Fraction(x)
    if not 0 < x <= 1:
        raise OutOfDomain(f"Gauss map needs 0 < x <= 1, got {x}")
    inv = 1 / x
    return inv - math.floor(inv)


def expand(x) -> tuple:
    """Canonical digits of a rational in (0, 1); the last digit is >= 2."""
    x = Fraction(x)
    if not 0 < x < 1:
        raise OutOfDomain(f"expand needs 0 < x < 1, got {x}")
    num, den = x.numerator, x.denominator
    digits = []
    while num:
        a, r = divmod(den, num)
        digits.append(a)
        num, den = r, num
    # the Euclidean algorithm never ends on a 1 unless x == 1
    return tuple(digits)


def verify_qn_bounds(digits: Sequence[int], k: int) -> dict:
    """Exact check of the three cylinder-length bounds at split index k.

    Returns ``{"length": bool, "product": bool, "split": bool}`` plus the
    split ratio as a Fraction under ``"ratio"``.
    """
    d = check_digits(digits)
    n = len(d)
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"need 1 <= k <= {n}, got {k}")
    _, q, _, qp = last_two(d)
    den = q * (q + qp)  # |I_n| = 1/den
    # (i) 1/(2q^2) <= 1/den <= 1/q^2
    length_ok = q * q <= den <= 2 * q * q
    # (ii) 1/2 prod (a+1)^-2 <= 1/den <= prod a^-2
    prod_a = math.prod(d) ** 2
    prod_a1 = math.prod(a + 1 for a in d) ** 2
    product_ok = prod_a <= den <= 2 * prod_a1
    # (iii) 1 <= q_n / (q_k q_{n-k}(a_{k+1..n})) <= 2
    split = q_of(d[:k]) * q_of(d[k:])
    ratio = Fraction(q, split)
    return {
        "length": length_ok,
        "product": product_ok,
        "split": 1 <= ratio <= 2,
        "ratio": ratio,
    }


def log_int(n: int) -> float:
    """Natural log of a positive int of any size.

    Uses the leading 64 bits and the bit length, so the relative error is
    at the level of double rounding regardless of the size of ``n``.
    """
    if n <= 0:
        raise OutOfDomain(f"log of non-positive integer {n}")
    b = n.bit_length()
    if b <= 64:
        return math.log(n)
    shift = b - 64
    return math.log(n >> shift) + shift * LOG2


def log_fraction(x) -> float:
    x = Fraction(x)
    return log_int(x.numerator) - log_int(x.denominator)
