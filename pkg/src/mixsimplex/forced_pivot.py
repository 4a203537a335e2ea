"""Drive an exact tableau to a basis suggested by an untrusted solver."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .simplex import ContractError, SolverState, pivot, trivial_row_unsat


class NonbasicSide(enum.Enum):
    AT_LOWER = "lower"
    AT_UPPER = "upper"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class BasisHint:
    target_basic: frozenset
    nonbasic_side: dict = field(default_factory=dict)


@dataclass
class ForcedPivotResult:
    """Outcome of :func:`forced_pivot`; truthy iff the target basis was reached.

    ``conflict`` names a basic variable whose row became trivially
    unsatisfiable, in which case pivoting stopped early.
    """

    reached: bool
    pivots: int = 0
    sweeps: int = 0
    conflict: int | None = None

    def __bool__(self):
        return self.reached


def forced_pivot(s: SolverState, hint: BasisHint, early_exit: bool = True) -> ForcedPivotResult:
    """Pivot until the basic set equals ``hint.target_basic`` or no pivot applies.

    Leaving variables are tried in increasing order of row length and entering
    ones in increasing order of the number of rows they occur in, both fixed
    up front.  The target is reached iff it is a feasible partition of the
    equation system.  With ``early_exit`` the input rows and every row touched
    by a pivot are tested for trivial unsatisfiability.
    """
    target = set(hint.target_basic)
    if len(target) != len(s.basic):
        raise ContractError(f"hint has {len(target)} basic variables, state has {len(s.basic)}")
    if early_exit:
        for b in sorted(s.basic):
            if trivial_row_unsat(s, b):
                return ForcedPivotResult(False, conflict=b)

    leaving = sorted(s.basic - target, key=lambda b: (len(s.rows[b]), b))
    entering = sorted(target - s.basic, key=lambda n: (len(s.cols[n]), n))
    rank = {n: i for i, n in enumerate(entering)}

    result = ForcedPivotResult(False)
    progressed = True
    while progressed:
        progressed = False
        result.sweeps += 1
        for b in leaving:
            if b not in s.basic:
                continue
            best = None
            for n in s.rows[b]:
                r = rank.get(n)
                if r is not None and n not in s.basic and (best is None or r < rank[best]):
                    best = n
            if best is None:
                continue
            touched = s.cols[best] | {best}
            pivot(s, b, best)
            result.pivots += 1
            progressed = True
            if early_exit:
                touched.discard(b)
                for r in sorted(touched):
                    if trivial_row_unsat(s, r):
                        result.conflict = r
                        return result
        leaving = [b for b in leaving if b in s.basic]
    result.reached = s.basic == target
    return result


def apply_hint_values(s: SolverState, hint: BasisHint) -> None:
    """Put hinted nonbasic variables on their hinted (finite) bound.

    Other nonbasic variables keep their value, clamped into their box: forced
    pivoting may have left a former basic variable nonbasic outside its
    bounds.  Basic values are then recomputed from the rows.
    """
    for n in s.nonbasic():
        side = hint.nonbasic_side.get(n)
        if side is NonbasicSide.AT_LOWER and s.lower[n] is not None:
            s.value[n] = s.lower[n]
        elif side is NonbasicSide.AT_UPPER and s.upper[n] is not None:
            s.value[n] = s.upper[n]
        else:
            s._clamp(n)
    s.recompute_basic()
    if s.debug:
        s.check_invariants(bounds=False)
