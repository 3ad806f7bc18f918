"""Parsing, evaluation and validation of integer sequence definitions.

Accepted text forms::

    nu(n) = 2*n
    sigma(n) = n*(n+1)/2 + 5
    n^2                       (bare expression, kind given by the caller)
    sigma = [2, 6, 12, 20]    (finite table)

Expression grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := integer | 'n' | '(' expr ')' | ('floor'|'ceil') '(' expr ')'

Evaluation is exact: ``/`` is rational division and a value must come out
integral at every evaluated ``n`` unless wrapped in floor/ceil.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import (
    EvaluationError,
    HorizonExceeded,
    NonIntegerValue,
    ParseError,
    ValidationError,
)

KINDS = ("nu", "sigma")

# exponent * bit-length cap; beyond this a power is refused rather than computed
_POW_BIT_LIMIT = 10**8


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Num, Var, BinOp, Pow, Call]


_TOKEN = re.compile(r"\s*(?:(\d+)|(floor|ceil|n)\b|([-+*/^()]))")


def _tokenize(text):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:]
            if rest.strip():
                start = pos + len(rest) - len(rest.lstrip())
                raise ParseError(text, start, "token", rest.strip()[:10])
            break
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            out.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            out.append((m.group(2), m.group(2), start))
        else:
            out.append((m.group(3), m.group(3), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind, expected=None):
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise ParseError(self.text, tok[2],
                             expected or repr(kind), tok[1] or "end of input")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        self.take("eof", "end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take(self.peek())[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take(self.peek())[0]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        base = self.base()
        if self.peek() == "^":
            self.take("^")
            return Pow(base, self.factor())
        return base

    def base(self):
        kind = self.peek()
        if kind == "int":
            return Num(int(self.take("int")[1]))
        if kind == "n":
            self.take("n")
            return Var()
        if kind == "(":
            self.take("(")
            node = self.expr()
            self.take(")", "')'")
            return node
        if kind in ("floor", "ceil"):
            self.take(kind)
            self.take("(", "'('")
            node = self.expr()
            self.take(")", "')'")
            return Call(kind, node)
        tok = self.toks[self.i]
        raise ParseError(self.text, tok[2],
                         "integer, 'n', '(', floor or ceil", tok[1] or "end of input")


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


def unparse(node: Node) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, Pow):
        return f"({unparse(node.base)})^({unparse(node.exp)})"
    if isinstance(node, Call):
        return f"{node.fn}({unparse(node.arg)})"
    raise TypeError(node)


def evaluate(node: Node, n: int) -> Fraction:
    """Exact rational value of the expression at ``n``."""
    if isinstance(node, Num):
        return Fraction(node.value)
    if isinstance(node, Var):
        return Fraction(n)
    if isinstance(node, BinOp):
        a = evaluate(node.left, n)
        b = evaluate(node.right, n)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise EvaluationError(f"division by zero at n={n}")
        return a / b
    if isinstance(node, Pow):
        base = evaluate(node.base, n)
        e = evaluate(node.exp, n)
        if e.denominator != 1 or e < 0:
            raise EvaluationError(f"exponent {e} is not a non-negative integer at n={n}")
        e = int(e)
        size = max(abs(base.numerator).bit_length(), base.denominator.bit_length(), 1)
        if e * size > _POW_BIT_LIMIT:
            raise EvaluationError(f"power too large to evaluate at n={n}")
        return base**e
    if isinstance(node, Call):
        v = evaluate(node.arg, n)
        return Fraction(math.floor(v) if node.fn == "floor" else math.ceil(v))
    raise TypeError(node)


_HEAD = re.compile(r"\s*(nu|sigma)\s*(\(\s*n\s*\))?\s*=\s*")
_TABLE = re.compile(r"\s*\[(.*)\]\s*$", re.S)


@dataclass(frozen=True, eq=False)
class SequenceSpec:
    """A parsed (nu_n) or (sigma_n) definition.

    Exactly one of ``expr`` / ``table`` is set.  Values are cached; the
    cache only ever stores deterministic results, so concurrent readers
    can at worst recompute a value.
    """

    kind: str
    text: str
    expr: Node | None = None
    table: tuple | None = None
    strict: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, n: int) -> int:
        if n < 1:
            raise EvaluationError(f"sequences are indexed from 1, got n={n}")
        try:
            return self._cache[n]
        except KeyError:
            pass
        if self.table is not None:
            if n > len(self.table):
                raise HorizonExceeded(
                    f"{self.kind} table has {len(self.table)} entries, asked for n={n}"
                )
            v = self.table[n - 1]
        else:
            x = evaluate(self.expr, n)
            if x.denominator != 1:
                raise NonIntegerValue(f"{self.kind}({n}) = {x} is not an integer")
            v = int(x)
        self._cache[n] = v
        return v

    @property
    def horizon(self) -> float:
        """Largest n with a value (inf for expressions)."""
        return len(self.table) if self.table is not None else math.inf

    def eval_range(self, lo: int, hi: int) -> list[int]:
        if not 1 <= lo <= hi:
            raise EvaluationError(f"need 1 <= lo <= hi, got {lo}, {hi}")
        return [self(n) for n in range(lo, hi + 1)]

    def canonical(self) -> str:
        if self.table is not None:
            return f"{self.kind} = [{', '.join(map(str, self.table))}]"
        return f"{self.kind}(n) = {unparse(self.expr)}"

    def same_definition(self, other: "SequenceSpec") -> bool:
        return (self.kind, self.expr, self.table) == (other.kind, other.expr, other.table)

    def with_strict(self, strict: bool) -> "SequenceSpec":
        return SequenceSpec(self.kind, self.text, self.expr, self.table, strict)


@dataclass
class ValidationReport:
    ok: bool
    horizon: int
    first_violation: int | None = None
    reason: str = ""


def parse(text: str, kind: str | None = None, *, strict: bool = True,
          check: bool = True, horizon: int = 50) -> SequenceSpec:
    """Parse a sequence definition.

    ``kind`` is required for bare expressions and must agree with any
    ``nu(n) =`` / ``sigma(n) =`` head.  With ``check`` the spec is validated
    on ``[1, horizon]`` (capped at a table's length) and
    :class:`ValidationError` is raised on failure.
    """
    body_start = 0
    m = _HEAD.match(text)
    if m:
        head = m.group(1)
        if kind is not None and kind != head:
            raise ParseError(text, m.start(1), f"{kind!r} definition", head)
        kind = head
        body_start = m.end()
    if kind not in KINDS:
        raise ParseError(text, 0, "'nu(n) =' or 'sigma(n) ='", text[:10])
    body = text[body_start:]
    t = _TABLE.match(body)
    if t:
        items = [s.strip() for s in t.group(1).split(",") if s.strip()]
        table = []
        for s in items:
            if not re.fullmatch(r"\d+", s):
                pos = body_start + body.find(s)
                raise ParseError(text, pos, "non-negative integer", s)
            table.append(int(s))
        if not table:
            raise ParseError(text, body_start, "at least one table entry", "[]")
        spec = SequenceSpec(kind, text, table=tuple(table), strict=strict)
    else:
        try:
            node = _Parser(body).parse()
        except ParseError as e:
            raise ParseError(text, e.position + body_start, e.expected, e.found) from None
        spec = SequenceSpec(kind, text, expr=node, strict=strict)
    if check:
        h = horizon if spec.table is None else min(horizon, len(spec.table))
        rep = validate(spec, h, _min_horizon=1)
        if not rep.ok:
            raise ValidationError(
                f"{spec.kind} fails validation at n={rep.first_violation}: {rep.reason}", rep
            )
    return spec


def validate(spec: SequenceSpec, horizon: int, *, _min_horizon: int = 10) -> ValidationReport:
    """Positivity, monotonicity and (sigma only) the gap condition on [1, horizon]."""
    if horizon < _min_horizon:
        raise ValueError(f"horizon must be >= {_min_horizon}")
    last = None
    upto = horizon + 1 if spec.kind == "sigma" else horizon
    if spec.table is not None:
        upto = min(upto, len(spec.table))
    for n in range(1, upto + 1):
        try:
            v = spec(n)
        except EvaluationError as e:
            return ValidationReport(False, horizon, n, str(e))
        if v < 1:
            return ValidationReport(False, horizon, n, f"value {v} is not positive")
        if last is not None:
            gap = v - last
            if spec.kind == "sigma":
                if gap < n - 1:
                    return ValidationReport(
                        False, horizon, n - 1,
                        f"gap sigma({n}) - sigma({n - 1}) = {gap} < {n - 1}",
                    )
            elif spec.strict and gap <= 0:
                return ValidationReport(False, horizon, n, f"not strictly increasing ({last} -> {v})")
            elif gap < 0:
                return ValidationReport(False, horizon, n, f"decreasing ({last} -> {v})")
        last = v
    return ValidationReport(True, horizon)
