"""Parsing and canonicalization of linear constraint conjunctions.

A constraint file holds one constraint per line::

    # comment
    1 x -2 y <= 1
    1/2 x < 1/4
    3 a 2 b = 7 -1 c

Grammar (tokens are separated by whitespace, ``#`` starts a comment)::

    line  := side REL side
    side  := item+
    item  := RAT VAR        -- a term
           | RAT            -- a constant (when not followed by a VAR)
    REL   := '<=' | '<' | '>=' | '>' | '='
    RAT   := [+-]?[0-9]+('/'[0-9]+)?
    VAR   := [A-Za-z_][A-Za-z0-9_]*

Terms on the right are moved to the left and constants to the right, and
repeated variables are merged.  A line whose merged left side is empty is a
syntax error ("no variables").

Canonicalization rescales each left side to coprime integer coefficients
with a positive leading coefficient (in first-appearance variable order),
introduces one slack variable per distinct multi-variable left side and turns
every constraint into a bound on a single variable.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, NamedTuple

from .numeric import ONE, ZERO, DeltaRat, ExtBound, Rat, parse_rat

_VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class Relation(enum.Enum):
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"
    EQ = "="

    def flipped(self) -> "Relation":
        return _FLIP[self]

    @property
    def is_strict(self) -> bool:
        return self in (Relation.LT, Relation.GT)


_FLIP = {
    Relation.LE: Relation.GE,
    Relation.LT: Relation.GT,
    Relation.GE: Relation.LE,
    Relation.GT: Relation.LT,
    Relation.EQ: Relation.EQ,
}
_REL_TOKENS = {r.value: r for r in Relation}


class Side(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"

    def other(self) -> "Side":
        return Side.UPPER if self is Side.LOWER else Side.LOWER


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class RawConstraint:
    """``sum(terms[v] * v) relation rhs``; ``terms`` has no zero coefficients."""

    terms: dict
    relation: Relation
    rhs: Rat
    id: int = 0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("constraint without variables")
        if any(c.is_zero() for c in self.terms.values()):
            raise ValueError("zero coefficient stored in constraint")

    def __str__(self):
        lhs = " ".join(f"{c} {v}" for v, c in self.terms.items())
        return f"{lhs} {self.relation.value} {self.rhs}"


def parse_line(line: str, lineno: int = 1, cid: int = 0) -> RawConstraint | None:
    """Parse one line; returns None for blank or comment-only lines."""
    body = line.split("#", 1)[0].split()
    if not body:
        return None
    rel_at = [i for i, tok in enumerate(body) if tok in _REL_TOKENS]
    if len(rel_at) != 1:
        raise ParseError(lineno, "expected exactly one relation")
    k = rel_at[0]
    relation = _REL_TOKENS[body[k]]
    if k == 0 or k == len(body) - 1:
        raise ParseError(lineno, "empty side of relation")
    terms: dict[str, Rat] = {}
    rhs = ZERO
    for tokens, sign in ((body[:k], 1), (body[k + 1:], -1)):
        i = 0
        while i < len(tokens):
            try:
                coef = parse_rat(tokens[i])
            except ValueError:
                raise ParseError(lineno, f"bad coefficient {tokens[i]!r}") from None
            if i + 1 < len(tokens) and _VAR_RE.match(tokens[i + 1]):
                var = tokens[i + 1]
                terms[var] = terms.get(var, ZERO) + (coef if sign > 0 else -coef)
                i += 2
            else:
                rhs = rhs - coef if sign > 0 else rhs + coef
                i += 1
    terms = {v: c for v, c in terms.items() if not c.is_zero()}
    if not terms:
        raise ParseError(lineno, "no variables")
    return RawConstraint(terms, relation, rhs, cid)


def parse(text: str) -> list[RawConstraint]:
    """Parse a whole constraint file; constraint ids follow file order from 0."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        c = parse_line(line, lineno, len(out))
        if c is not None:
            out.append(c)
    return out


def format_constraints(cs: Iterable[RawConstraint]) -> str:
    return "".join(f"{c}\n" for c in cs)


class Normalized(NamedTuple):
    key: tuple          # ((var, int coefficient), ...) in variable order
    relation: Relation
    rhs: Rat
    scale: Rat          # normalized = scale * original, scale != 0


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def normalize(c: RawConstraint, var_order) -> Normalized:
    """Scale ``c`` to coprime integer coefficients, leading one positive.

    ``var_order`` maps each variable to its rank.  Proportional left-hand
    sides, whatever the sign of the factor, produce the same key.
    """
    items = sorted(c.terms.items(), key=lambda kv: var_order[kv[0]])
    den = 1
    for _, coef in items:
        den = _lcm(den, coef.denominator)
    ints = [coef.numerator * (den // coef.denominator) for _, coef in items]
    g = 0
    for a in ints:
        g = gcd(g, a)
    if ints[0] < 0:
        g = -g
    scale = Rat(den, g)
    key = tuple((v, a // g) for (v, _), a in zip(items, ints))
    relation = c.relation if scale.sign() > 0 else c.relation.flipped()
    return Normalized(key, relation, c.rhs * scale, scale)


def strict_to_delta(relation: Relation, rhs: Rat) -> tuple[Side, ExtBound]:
    """Turn ``v REL rhs`` into a bound on ``v``, strictness as an ε offset."""
    if relation is Relation.LE:
        return Side.UPPER, ExtBound.finite(DeltaRat(rhs, ZERO))
    if relation is Relation.LT:
        return Side.UPPER, ExtBound.finite(DeltaRat(rhs, -ONE))
    if relation is Relation.GE:
        return Side.LOWER, ExtBound.finite(DeltaRat(rhs, ZERO))
    if relation is Relation.GT:
        return Side.LOWER, ExtBound.finite(DeltaRat(rhs, ONE))
    raise ValueError("equalities give two bounds; split them before calling")


@dataclass(frozen=True)
class BoundSource:
    """One original constraint contributing a bound ``value`` on a side.

    ``scale`` is the factor from the original constraint to the bound's
    normalized form (negative when the constraint was flipped).
    """

    cid: int
    scale: Rat
    value: DeltaRat


@dataclass
class Problem:
    """Tableau of slack definitions plus a box of bounds.

    Variables are integers: ``0 .. n_structural-1`` are the input variables in
    first-appearance order, the rest are slacks.  ``equalities[s]`` is the
    defining row of slack ``s`` over structural variables.
    """

    names: list
    n_structural: int
    equalities: dict
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)
    backmap: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    slack_keys: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def bounds(self, var: int) -> tuple[ExtBound, ExtBound]:
        lo = self.lower.get(var)
        hi = self.upper.get(var)
        return (ExtBound.finite(lo.value) if lo else ExtBound.minus_inf(),
                ExtBound.finite(hi.value) if hi else ExtBound.plus_inf())

    def index(self, name: str) -> int:
        return self.names.index(name)


def variable_order(cs: Iterable[RawConstraint]) -> dict:
    order: dict[str, int] = {}
    for c in cs:
        for v in c.terms:
            if v not in order:
                order[v] = len(order)
    return order


def _tighter(side: Side, a: DeltaRat, b: DeltaRat) -> bool:
    return a < b if side is Side.UPPER else a > b


def build_problem(cs: list[RawConstraint]) -> Problem:
    order = variable_order(cs)
    names = list(order)
    n_struct = len(names)
    slack_for: dict[tuple, int] = {}
    equalities: dict[int, dict[int, Rat]] = {}
    lower: dict[int, BoundSource] = {}
    upper: dict[int, BoundSource] = {}
    backmap: dict[tuple[int, Side], list[BoundSource]] = {}

    for c in cs:
        norm = normalize(c, order)
        if len(norm.key) == 1:
            var = order[norm.key[0][0]]
        else:
            var = slack_for.get(norm.key)
            if var is None:
                var = len(names)
                names.append(f"_s{var - n_struct}")
                slack_for[norm.key] = var
                equalities[var] = {order[v]: Rat(a) for v, a in norm.key}
        if norm.relation is Relation.EQ:
            pieces = [(Side.UPPER, DeltaRat(norm.rhs, ZERO)),
                      (Side.LOWER, DeltaRat(norm.rhs, ZERO))]
        else:
            side, bound = strict_to_delta(norm.relation, norm.rhs)
            pieces = [(side, bound.value)]
        for side, value in pieces:
            src = BoundSource(c.id, norm.scale, value)
            backmap.setdefault((var, side), []).append(src)
            best = upper if side is Side.UPPER else lower
            cur = best.get(var)
            if cur is None or _tighter(side, value, cur.value):
                best[var] = src
    return Problem(names, n_struct, equalities, lower, upper, backmap, list(cs), slack_for)
