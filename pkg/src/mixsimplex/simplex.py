"""Exact bounded-variable simplex for conjunctions of linear constraints.

The state is a tableau ``b = sum(t[b][n] * n)`` over nonbasic ``n``, a box of
DeltaRat bounds and a current DeltaRat value per variable.  ``check`` pivots
with Bland's least-index rule until every basic variable is inside its box
(satisfiable) or some violated row cannot be repaired (unsatisfiable).

Next to each row the state keeps an auxiliary row recording which multiples
of the initial defining equations it was built from; unsatisfiability
certificates are read off that row.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import gcd

from .canonicalize import Problem, RawConstraint, Relation, Side
from .numeric import ONE, ZERO, DeltaRat, Rat, addmul
from .witness import CertificateError, Sat, Unsat, materialize_point, verify_unsat


class ContractError(RuntimeError):
    """A documented precondition was violated by the caller."""


class TimeLimit(RuntimeError):
    """Raised by :func:`check` when its deadline passes."""


@dataclass(frozen=True)
class Source:
    """Where a bound came from: constraint ``tag`` scaled by ``scale``."""

    tag: object
    scale: Rat = ONE
    is_equality: bool = False


@dataclass(frozen=True)
class Propagation:
    var: int
    side: Side
    value: DeltaRat
    entailed: bool  # False means the candidate is refuted
    row: int


class SolverState:
    """Mutable simplex state; build it with :func:`init` or :meth:`from_rows`."""

    debug = False

    def __init__(self, n_vars: int, rows: dict, names=None, constraints=None):
        self.n_vars = n_vars
        self.names = list(names) if names is not None else [f"v{i}" for i in range(n_vars)]
        self.rows = {b: dict(r) for b, r in rows.items()}
        self.basic = set(self.rows)
        # initial coordinates: the variables that start nonbasic
        self.structural = [v for v in range(n_vars) if v not in self.basic]
        self.definitions = {b: dict(r) for b, r in rows.items()}
        self.aux = {b: {b: ONE} for b in self.rows}
        self.cols = {v: set() for v in range(n_vars) if v not in self.basic}
        for b, r in self.rows.items():
            for n in r:
                self.cols[n].add(b)
        self.lower: list = [None] * n_vars
        self.upper: list = [None] * n_vars
        self.lower_src: list = [None] * n_vars
        self.upper_src: list = [None] * n_vars
        self.value = [DeltaRat() for _ in range(n_vars)]
        self.trail: list = []
        self.pivot_count = 0
        # tag -> RawConstraint over the initial coordinates, for certificates
        self.constraints = {c.id: c for c in constraints or ()}

    @classmethod
    def from_rows(cls, rows: dict, n_vars: int | None = None, lower=None, upper=None,
                  names=None) -> "SolverState":
        """Build a state from explicit rows ``{basic: {nonbasic: coef}}``.

        Bounds are ``{var: value}`` maps (Rat, int or DeltaRat); each gets the
        tag ``("lower", var)`` or ``("upper", var)``.
        """
        if n_vars is None:
            used = set(rows)
            for r in rows.values():
                used.update(r)
            n_vars = max(used) + 1 if used else 0
        rows = {b: {n: _as_rat(c) for n, c in r.items() if not _as_rat(c).is_zero()}
                for b, r in rows.items()}
        s = cls(n_vars, rows, names)
        for side, bounds in ((Side.LOWER, lower), (Side.UPPER, upper)):
            for var, val in (bounds or {}).items():
                tag = (side.value, var)
                s._set_bound(var, side, _as_delta(val), Source(tag))
                s.register(tag, var, side)
        s._clamp_all()
        return s

    def register(self, tag, var: int, side: Side) -> None:
        """Record the current ``side`` bound of ``var`` as constraint ``tag``."""
        self.constraints[tag] = _bound_as_constraint(self, var, side, self.bound(var, side), tag)

    # bounds -------------------------------------------------------------

    def _set_bound(self, var, side, value, src):
        if side is Side.LOWER:
            self.lower[var], self.lower_src[var] = value, src
        else:
            self.upper[var], self.upper_src[var] = value, src

    def bound(self, var: int, side: Side):
        return self.lower[var] if side is Side.LOWER else self.upper[var]

    def _clamp_all(self):
        for n in self.nonbasic():
            self._clamp(n)
        self.recompute_basic()

    def _clamp(self, n):
        v = self.value[n]
        lo, hi = self.lower[n], self.upper[n]
        if lo is not None and v < lo:
            self.value[n] = lo
        elif hi is not None and v > hi:
            self.value[n] = hi

    def nonbasic(self):
        return [v for v in range(self.n_vars) if v not in self.basic]

    def in_bounds(self, var: int) -> bool:
        v = self.value[var]
        lo, hi = self.lower[var], self.upper[var]
        return (lo is None or v >= lo) and (hi is None or v <= hi)

    def recompute_basic(self):
        value = self.value
        for b, r in self.rows.items():
            acc_r, acc_e = ZERO, ZERO
            for n, t in r.items():
                vn = value[n]
                acc_r = acc_r + t * vn.real
                if not vn.eps.is_zero():
                    acc_e = acc_e + t * vn.eps
            value[b] = DeltaRat(acc_r, acc_e)

    def row_interval(self, b: int):
        """Interval of ``sum(t[b][n] * n)`` over the nonbasic boxes (None = infinite)."""
        lo = hi = DeltaRat()
        lo_ok = hi_ok = True
        for n, t in self.rows[b].items():
            if t.sign() > 0:
                a, z = self.lower[n], self.upper[n]
            else:
                a, z = self.upper[n], self.lower[n]
            if lo_ok:
                if a is None:
                    lo_ok = False
                else:
                    lo = lo + a.scale(t)
            if hi_ok:
                if z is None:
                    hi_ok = False
                else:
                    hi = hi + z.scale(t)
            if not (lo_ok or hi_ok):
                break
        return (lo if lo_ok else None), (hi if hi_ok else None)

    def bound_constraints(self) -> list[RawConstraint]:
        """Active bounds as constraints over the initial coordinates."""
        out = []
        for var in range(self.n_vars):
            for side in (Side.LOWER, Side.UPPER):
                val = self.bound(var, side)
                if val is None:
                    continue
                src = self.lower_src[var] if side is Side.LOWER else self.upper_src[var]
                out.append(_bound_as_constraint(self, var, side, val, src.tag))
        return out

    def check_invariants(self, bounds: bool = True):
        """Raise ContractError if an invariant of the state fails.

        ``bounds=False`` skips the nonbasic-within-bounds check, which is
        legitimately broken between a pivot and the follow-up value update.
        """
        if len(self.basic) != len(self.rows) or set(self.rows) != self.basic:
            raise ContractError("basic set out of sync with rows")
        for b, r in self.rows.items():
            if any(n in self.basic for n in r):
                raise ContractError(f"row {b} mentions a basic variable")
            acc = DeltaRat()
            for n, t in r.items():
                acc = acc + self.value[n].scale(t)
            if acc != self.value[b]:
                raise ContractError(f"value of basic {b} disagrees with its row")
            if _row_from_aux(self, b) != _row_equation(self, b):
                raise ContractError(f"auxiliary row of {b} does not reproduce the tableau row")
        for n in self.nonbasic() if bounds else ():
            lo, hi = self.lower[n], self.upper[n]
            empty = lo is not None and hi is not None and lo > hi
            if not empty and not self.in_bounds(n):
                raise ContractError(f"nonbasic {n} outside its bounds")


def _as_rat(x) -> Rat:
    return x if isinstance(x, Rat) else Rat(x)


def _as_delta(x) -> DeltaRat:
    return x if isinstance(x, DeltaRat) else DeltaRat(_as_rat(x), ZERO)


def init(p: Problem) -> SolverState:
    """Slacks basic, structural variables nonbasic and clamped into their boxes."""
    s = SolverState(p.n_vars, p.equalities, p.names, p.constraints)
    eq_cids = {c.id for c in p.constraints if c.relation is Relation.EQ}
    for var, src in p.lower.items():
        s._set_bound(var, Side.LOWER, src.value, Source(src.cid, src.scale, src.cid in eq_cids))
    for var, src in p.upper.items():
        s._set_bound(var, Side.UPPER, src.value, Source(src.cid, src.scale, src.cid in eq_cids))
    s._clamp_all()
    return s


# pivoting --------------------------------------------------------------

def pivot(s: SolverState, b: int, n: int) -> None:
    """Exchange basic ``b`` with nonbasic ``n``; the solution subspace is unchanged."""
    if b not in s.basic or n in s.basic:
        raise ContractError(f"pivot({b}, {n}): need b basic and n nonbasic")
    row_b = s.rows[b]
    a = row_b.get(n)
    if a is None or a.is_zero():
        raise ContractError(f"pivot({b}, {n}): zero pivot element")
    del s.rows[b]
    del row_b[n]
    p = -a.reciprocal()
    row_n = {k: p * c for k, c in row_b.items()}
    row_n[b] = a.reciprocal()
    aux_n = {j: p * c for j, c in s.aux.pop(b).items()}

    cols = s.cols
    for k in row_b:
        cols[k].discard(b)
    affected = cols.pop(n)
    affected.discard(b)
    cols[b] = set()

    rows, aux = s.rows, s.aux
    for b2 in affected:
        r = rows[b2]
        q = r.pop(n)
        _axpy(r, q, row_n, b2, cols)
        _axpy(aux[b2], q, aux_n)

    rows[n] = row_n
    aux[n] = aux_n
    for k in row_n:
        cols[k].add(n)
    s.basic.discard(b)
    s.basic.add(n)
    s.pivot_count += 1
    if s.debug:
        s.check_invariants(bounds=False)


def _axpy(dst: dict, q: Rat, src: dict, owner=None, cols=None) -> None:
    """``dst += q * src`` on sparse rows, dropping entries that cancel."""
    for k, c in src.items():
        old = dst.get(k)
        if old is None:
            dst[k] = q * c
            if cols is not None:
                cols[k].add(owner)
        else:
            new = addmul(old, q, c)
            if new.is_zero():
                del dst[k]
                if cols is not None:
                    cols[k].discard(owner)
            else:
                dst[k] = new


def update_nonbasic(s: SolverState, n: int, v: DeltaRat) -> None:
    """Move nonbasic ``n`` to ``v`` and shift the basic values accordingly."""
    if n in s.basic:
        raise ContractError(f"update_nonbasic: {n} is basic")
    lo, hi = s.lower[n], s.upper[n]
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ContractError(f"update_nonbasic: value {v} outside the bounds of {n}")
    delta = v - s.value[n]
    if delta.real.is_zero() and delta.eps.is_zero():
        return
    s.value[n] = v
    value, rows = s.value, s.rows
    for b in s.cols[n]:
        value[b] = value[b] + delta.scale(rows[b][n])
    if s.debug:
        s.check_invariants(bounds=False)


# conflicts and certificates --------------------------------------------

def empty_box(s: SolverState):
    """Least variable whose lower bound exceeds its upper bound, or None."""
    for v in range(s.n_vars):
        lo, hi = s.lower[v], s.upper[v]
        if lo is not None and hi is not None and lo > hi:
            return v
    return None


def trivial_row_unsat(s: SolverState, b: int) -> bool:
    """True iff interval evaluation of row ``b`` misses the box of ``b``."""
    return _row_conflict_side(s, b) is not None


def _row_conflict_side(s: SolverState, b: int):
    lo_b, hi_b = s.lower[b], s.upper[b]
    if lo_b is None and hi_b is None:
        return None
    lo, hi = s.row_interval(b)
    if lo_b is not None and hi is not None and hi < lo_b:
        return Side.LOWER
    if hi_b is not None and lo is not None and lo > hi_b:
        return Side.UPPER
    return None


def _row_equation(s: SolverState, b: int) -> dict:
    """Coefficients of ``b - sum(t[b][n] * n)`` (implicitly ``= 0``)."""
    eq = {n: -t for n, t in s.rows[b].items()}
    eq[b] = ONE
    return eq


def _row_from_aux(s: SolverState, b: int) -> dict:
    """The same equation rebuilt from the auxiliary row and the definitions."""
    eq: dict = {}
    for j, w in s.aux[b].items():
        eq[j] = eq.get(j, ZERO) + w
        for k, c in s.definitions[j].items():
            eq[k] = eq.get(k, ZERO) - w * c
    return {v: c for v, c in eq.items() if not c.is_zero()}


def farkas_from_row(s: SolverState, b: int) -> dict:
    """Certificate for a row whose interval misses the box of basic ``b``.

    The row equation is rebuilt from the auxiliary tableau; each variable in
    it is charged to the bound that blocks it, and the bounds are charged to
    the constraints that produced them.
    """
    side = _row_conflict_side(s, b)
    if side is None:
        raise ContractError(f"farkas_from_row: row {b} is not conflicting")
    uses = []
    for v, c in _row_from_aux(s, b).items():
        # the violated side of b blocks every variable of the same sign
        pos_side = side
        uses.append((v, pos_side if c.sign() > 0 else pos_side.other(), abs(c)))
    return _certificate(s, uses)


def _box_certificate(s: SolverState, v: int) -> dict:
    return _certificate(s, [(v, Side.LOWER, ONE), (v, Side.UPPER, ONE)])


def _certificate(s: SolverState, uses) -> dict:
    farkas: dict = {}
    for v, side, w in uses:
        src = s.lower_src[v] if side is Side.LOWER else s.upper_src[v]
        if src is None:
            raise ContractError(f"certificate needs a missing {side.value} bound on {v}")
        if src.is_equality:
            lam = w * src.scale if side is Side.UPPER else -(w * src.scale)
        else:
            lam = w * abs(src.scale)
        farkas[src.tag] = farkas.get(src.tag, ZERO) + lam
    farkas = _integral({k: lam for k, lam in farkas.items() if not lam.is_zero()})
    used = [s.constraints[t] for t in farkas if t in s.constraints]
    if len(used) != len(farkas) or not verify_unsat(farkas, used):
        raise CertificateError("Farkas certificate failed verification")
    return farkas


def _integral(farkas: dict) -> dict:
    """Rescale positively to coprime integers (any positive multiple is valid)."""
    den, num = 1, 0
    for lam in farkas.values():
        den = den * lam.denominator // gcd(den, lam.denominator)
    for lam in farkas.values():
        num = gcd(num, lam.numerator * (den // lam.denominator))
    if num == 0:
        return farkas
    k = Rat(den, num)
    return {t: lam * k for t, lam in farkas.items()}


def _bound_as_constraint(s: SolverState, var, side, value, tag) -> RawConstraint:
    if var in s.definitions:
        if not s.definitions[var]:
            raise ContractError(f"bound on {s.names[var]}, whose defining row is empty")
        terms = {s.names[k]: c for k, c in s.definitions[var].items()}
    else:
        terms = {s.names[var]: ONE}
    if side is Side.UPPER:
        rel = Relation.LT if value.eps.sign() < 0 else Relation.LE
    else:
        rel = Relation.GT if value.eps.sign() > 0 else Relation.GE
    return RawConstraint(terms, rel, value.real, tag)


# the check loop --------------------------------------------------------

def _violation(s: SolverState, b: int):
    v = s.value[b]
    lo, hi = s.lower[b], s.upper[b]
    if lo is not None and v < lo:
        return Side.LOWER
    if hi is not None and v > hi:
        return Side.UPPER
    return None


def _entering(s: SolverState, b: int, side: Side):
    """Least nonbasic able to push ``b`` back towards its ``side`` bound."""
    best = None
    for n, t in s.rows[b].items():
        if best is not None and n > best:
            continue
        grow = (t.sign() > 0) == (side is Side.LOWER)
        if grow:
            hi = s.upper[n]
            ok = hi is None or s.value[n] < hi
        else:
            lo = s.lower[n]
            ok = lo is None or s.value[n] > lo
        if ok:
            best = n
    return best


def check(s: SolverState, deadline: float | None = None):
    """Decide the state's constraints; returns Sat or Unsat.

    ``deadline`` is a :func:`time.perf_counter` instant after which the
    search gives up with :class:`TimeLimit`.
    """
    v = empty_box(s)
    if v is not None:
        return Unsat(_box_certificate(s, v))
    # the loop only repairs basic variables
    stray = [n for n in s.nonbasic() if not s.in_bounds(n)]
    if stray:
        for n in stray:
            s._clamp(n)
        s.recompute_basic()
    while True:
        b = side = None
        for cand in sorted(s.basic):
            side = _violation(s, cand)
            if side is not None:
                b = cand
                break
        if b is None:
            return _sat(s)
        n = _entering(s, b, side)
        if n is None:
            return Unsat(farkas_from_row(s, b))
        target = s.bound(b, side)
        pivot(s, b, n)
        update_nonbasic(s, b, target)
        if deadline is not None and time.perf_counter() > deadline:
            raise TimeLimit(f"gave up after {s.pivot_count} pivots")


def _sat(s: SolverState) -> Sat:
    u = {s.names[x]: s.value[x].real for x in s.structural}
    eps = {s.names[x]: s.value[x].eps for x in s.structural}
    point = materialize_point(u, eps, s.bound_constraints())
    return Sat(point)


def trivially_unsat_rows(s: SolverState) -> list:
    return [b for b in sorted(s.basic) if trivial_row_unsat(s, b)]


# incrementality --------------------------------------------------------

def assert_bound(s: SolverState, var: int, side: Side, value: DeltaRat, tag,
                 scale: Rat = ONE, is_equality: bool = False):
    """Tighten a bound; returns an Unsat verdict if the box of ``var`` empties.

    Unless ``tag`` already names a registered constraint, the bound itself is
    registered under ``tag`` for use in certificates.
    """
    value = _as_delta(value)
    cur = s.bound(var, side)
    if cur is not None and (value >= cur if side is Side.UPPER else value <= cur):
        return None
    old_src = s.lower_src[var] if side is Side.LOWER else s.upper_src[var]
    s.trail.append((var, side, cur, old_src))
    s._set_bound(var, side, value, Source(tag, scale, is_equality))
    if tag not in s.constraints:
        s.register(tag, var, side)
    lo, hi = s.lower[var], s.upper[var]
    if lo is not None and hi is not None and lo > hi:
        return Unsat(_box_certificate(s, var))
    if var not in s.basic and not s.in_bounds(var):
        update_nonbasic(s, var, value)
    return None


def mark(s: SolverState) -> int:
    return len(s.trail)


def retract_to(s: SolverState, depth: int) -> None:
    """Undo bound assertions back to trail ``depth``; the basis is kept."""
    if not 0 <= depth <= len(s.trail):
        raise ContractError(f"retract_to({depth}) with trail depth {len(s.trail)}")
    while len(s.trail) > depth:
        var, side, old, old_src = s.trail.pop()
        s._set_bound(var, side, old, old_src)
    for n in s.nonbasic():
        lo, hi = s.lower[n], s.upper[n]
        if lo is not None and hi is not None and lo > hi:
            continue  # still empty; check reports it
        if not s.in_bounds(n):
            update_nonbasic(s, n, lo if lo is not None and s.value[n] < lo else hi)


# theory propagation ----------------------------------------------------

def theory_propagate(s: SolverState, candidates) -> list[Propagation]:
    """Decide candidate literals ``(var, side, value)`` from row intervals.

    ``(x, Side.LOWER, 4)`` stands for ``x >= 4``.  A candidate on a basic
    variable is entailed when its row's interval lies inside the half-line and
    refuted when they are disjoint; undecided candidates are omitted.
    """
    out = []
    for var, side, value in candidates:
        value = _as_delta(value)
        if var not in s.basic:
            continue
        lo, hi = s.row_interval(var)
        if side is Side.UPPER:
            entailed = hi is not None and hi <= value
            refuted = lo is not None and lo > value
        else:
            entailed = lo is not None and lo >= value
            refuted = hi is not None and hi < value
        if entailed or refuted:
            out.append(Propagation(var, side, value, entailed, var))
    return out
