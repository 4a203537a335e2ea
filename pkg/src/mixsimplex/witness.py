"""Satisfiability witnesses, Farkas certificates and their checkers.

The checkers work on the original constraints only, with
:class:`fractions.Fraction` arithmetic, so they share nothing with the
solver and can be run by a third party on the certificate text.

Certificate text format::

    sat                     unsat
    <var> <rat>             <constraint-id> <rat>
    ...                     ...

Lines after the header are sorted (variables in input order, constraint ids
ascending).  Rationals use the ``[-]int[/int]`` literal syntax.  Multipliers
of equality constraints may be negative; all others are nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .canonicalize import RawConstraint, Relation
from .numeric import ONE, Rat, parse_rat


@dataclass(frozen=True)
class Sat:
    point: dict  # variable name -> Rat


@dataclass(frozen=True)
class Unsat:
    farkas: dict  # constraint id -> Rat


class CertificateError(AssertionError):
    """A produced witness failed its independent check (solver bug)."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rat):
        return x.as_fraction()
    return Fraction(x)


def materialize_point(u: dict, v: dict, cs: list[RawConstraint]) -> dict:
    """Turn the infinitesimal point ``u + εv`` into a rational point.

    Along the half-line ``u + t v`` every constraint holds on some interval
    ``(0, t0)``; the point at ``t0 / 2`` is returned, with ``t0 = 1`` when the
    half-line never leaves the solution set.
    """
    if all(c.is_zero() for c in v.values()):
        return dict(u)
    t0 = None
    for c in cs:
        # a.(u + t v) - rhs = base + t * slope
        base = -c.rhs
        slope = Rat(0)
        for var, coef in c.terms.items():
            base = base + coef * u.get(var, Rat(0))
            slope = slope + coef * v.get(var, Rat(0))
        if c.relation in (Relation.GE, Relation.GT):
            base, slope = -base, -slope
        elif c.relation is Relation.EQ:
            continue
        if slope.sign() > 0 and base.sign() < 0:
            limit = -base / slope
            if t0 is None or limit < t0:
                t0 = limit
    half = (t0 if t0 is not None else ONE) / 2
    point = {var: u.get(var, Rat(0)) + half * v.get(var, Rat(0))
             for var in set(u) | set(v)}
    if not verify_sat(point, cs):
        raise CertificateError("materialized point violates a constraint")
    return point


def verify_sat(point: dict, cs: list[RawConstraint]) -> bool:
    """Exact substitution; variables missing from ``point`` count as 0."""
    for c in cs:
        lhs = sum((_frac(coef) * _frac(point.get(var, 0)) for var, coef in c.terms.items()),
                  Fraction(0))
        rhs = _frac(c.rhs)
        ok = {
            Relation.LE: lhs <= rhs,
            Relation.LT: lhs < rhs,
            Relation.GE: lhs >= rhs,
            Relation.GT: lhs > rhs,
            Relation.EQ: lhs == rhs,
        }[c.relation]
        if not ok:
            return False
    return True


def verify_unsat(multipliers: dict, cs: list[RawConstraint]) -> bool:
    """Check a Farkas certificate against the original constraints.

    Every constraint is oriented as ``a.x <= r`` or ``a.x < r``; the
    multiplier-weighted sum must cancel all variables and leave ``0 <= c``
    with ``c < 0`` or ``0 < c`` with ``c <= 0``.
    """
    by_id = {c.id: c for c in cs}
    linear: dict = {}
    const = Fraction(0)
    strict = False
    nonzero = False
    for cid, lam in multipliers.items():
        c = by_id.get(cid)
        if c is None:
            return False
        lam = _frac(lam)
        if lam == 0:
            continue
        if lam < 0 and c.relation is not Relation.EQ:
            return False
        nonzero = True
        sign = -1 if c.relation in (Relation.GE, Relation.GT) else 1
        for var, coef in c.terms.items():
            linear[var] = linear.get(var, Fraction(0)) + lam * sign * _frac(coef)
        const += lam * sign * _frac(c.rhs)
        strict = strict or c.relation.is_strict
    if not nonzero or any(a != 0 for a in linear.values()):
        return False
    return const <= 0 if strict else const < 0


def format_certificate(verdict, names: list | None = None) -> str:
    if isinstance(verdict, Sat):
        order = names if names is not None else sorted(verdict.point)
        lines = ["sat"] + [f"{var} {verdict.point[var]}" for var in order if var in verdict.point]
    else:
        lines = ["unsat"] + [f"{cid} {lam}" for cid, lam in sorted(verdict.farkas.items())]
    return "\n".join(lines) + "\n"


def parse_certificate(text: str):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] not in (["sat"], ["unsat"]):
        raise ValueError("certificate must start with 'sat' or 'unsat'")
    body = {}
    for parts in lines[1:]:
        if len(parts) != 2:
            raise ValueError(f"malformed certificate line: {' '.join(parts)!r}")
        body[parts[0]] = parse_rat(parts[1])
    if lines[0] == ["sat"]:
        return Sat(body)
    return Unsat({int(k): v for k, v in body.items()})
