"""Untrusted binary64 feasibility simplex producing a basis hint.

Nothing here affects soundness: the exact solver only uses the returned
partition and nonbasic sides as a starting configuration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .canonicalize import Problem
from .forced_pivot import BasisHint, NonbasicSide
from .numeric import round_to_binary64


class FloatStatus(enum.Enum):
    FEASIBLE_GUESS = "feasible"
    INFEASIBLE_GUESS = "infeasible"
    FAILED = "failed"


@dataclass(frozen=True)
class FloatConfig:
    tol_feas: float = 1e-9
    tol_pivot: float = 1e-10
    iter_cap_factor: int = 20  # cap = factor * (rows + cols)
    iter_cap: int | None = None

    def cap(self, rows: int, cols: int) -> int:
        if self.iter_cap is not None:
            return self.iter_cap
        return self.iter_cap_factor * (rows + cols)


@dataclass
class FloatProblem:
    """``x[basic[i]] = sum_j matrix[i, j] * x[nonbasic[j]]`` with float boxes."""

    basic: list
    nonbasic: list
    matrix: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @property
    def n_vars(self) -> int:
        return len(self.lo)


@dataclass
class FloatOutcome:
    status: FloatStatus
    hint: BasisHint | None
    iterations: int
    # final tableau, reused by a warm start on the same equation system
    _basis: tuple | None = field(default=None, repr=False)


def lower_problem(p: Problem) -> FloatProblem:
    basic = sorted(p.equalities)
    nonbasic = list(range(p.n_structural))
    col = {v: j for j, v in enumerate(nonbasic)}
    matrix = np.zeros((len(basic), len(nonbasic)))
    for i, s in enumerate(basic):
        for v, c in p.equalities[s].items():
            matrix[i, col[v]] = round_to_binary64(c)
    lo = np.full(p.n_vars, -np.inf)
    hi = np.full(p.n_vars, np.inf)
    for v, src in p.lower.items():
        lo[v] = round_to_binary64(src.value)
    for v, src in p.upper.items():
        hi[v] = round_to_binary64(src.value)
    return FloatProblem(basic, nonbasic, matrix, lo, hi)


class _Tableau:
    def __init__(self, basic, nonbasic, matrix):
        self.basic = list(basic)
        self.nonbasic = list(nonbasic)
        self.T = np.array(matrix, dtype=float, copy=True)

    def pivot(self, i: int, j: int) -> None:
        T = self.T
        a = T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        r = -T[i, :] / a
        r[j] = 1.0 / a
        T[:, j] = 0.0
        T += np.outer(col, r)
        T[i, :] = r
        self.basic[i], self.nonbasic[j] = self.nonbasic[j], self.basic[i]


def _fingerprint(fp: FloatProblem):
    return (tuple(fp.basic), tuple(fp.nonbasic), fp.matrix.shape, fp.matrix.tobytes())


def _warm_tableau(fp: FloatProblem, warm: FloatOutcome | None, cfg: FloatConfig):
    if warm is None or warm.hint is None:
        return None
    if warm._basis is not None and warm._basis[0] == _fingerprint(fp):
        _, basic, nonbasic, T = warm._basis
        return _Tableau(basic, nonbasic, T)
    target = set(warm.hint.target_basic)
    if len(target) != len(fp.basic) or not target <= set(range(fp.n_vars)):
        return None
    tab = _Tableau(fp.basic, fp.nonbasic, fp.matrix)
    progressed = True
    while progressed:
        progressed = False
        for i, b in enumerate(tab.basic):
            if b in target:
                continue
            cand = [j for j, n in enumerate(tab.nonbasic) if n in target]
            if not cand:
                continue
            j = max(cand, key=lambda j: abs(tab.T[i, j]))
            if abs(tab.T[i, j]) > cfg.tol_pivot:
                tab.pivot(i, j)
                progressed = True
    return tab if set(tab.basic) == target else None


def solve_float(fp: FloatProblem, warm: FloatOutcome | None = None,
                config: FloatConfig | None = None) -> FloatOutcome:
    """Search a feasible vertex in floating point.

    Each iteration takes the least-index basic variable outside its box and
    pivots it against the least-index nonbasic variable that can move it back
    (Bland's rule), the basic variable landing on the violated bound.  It
    stops when no basic is out of bounds (feasible guess), when a violated
    row has no usable nonbasic (infeasible guess), or reports failure on
    numerical breakdown or when the iteration cap is hit.
    """
    cfg = config or FloatConfig()
    n_rows, n_cols = fp.matrix.shape
    lo, hi = fp.lo, fp.hi
    tab = _warm_tableau(fp, warm, cfg) or _Tableau(fp.basic, fp.nonbasic, fp.matrix)

    x = np.zeros(fp.n_vars)
    prior_side = warm.hint.nonbasic_side if warm is not None and warm.hint is not None else {}
    for n in tab.nonbasic:
        side = prior_side.get(n)
        if side is NonbasicSide.AT_LOWER and np.isfinite(lo[n]):
            x[n] = lo[n]
        elif side is NonbasicSide.AT_UPPER and np.isfinite(hi[n]):
            x[n] = hi[n]
        else:
            x[n] = min(max(0.0, lo[n]), hi[n]) if lo[n] <= hi[n] else lo[n]

    # relative tolerances; zero on infinite bounds so they stay infinite
    lo_tol = np.where(np.isfinite(lo), cfg.tol_feas * np.maximum(1.0, np.abs(lo)), 0.0)
    hi_tol = np.where(np.isfinite(hi), cfg.tol_feas * np.maximum(1.0, np.abs(hi)), 0.0)
    lo_ok = lo - lo_tol
    hi_ok = hi + hi_tol

    cap = cfg.cap(n_rows, n_cols)
    iterations = 0
    status = None
    while True:
        xn = x[tab.nonbasic]
        with np.errstate(all="ignore"):
            xb = tab.T @ xn if n_rows else np.zeros(0)
        if not np.all(np.isfinite(xb)):
            status = FloatStatus.FAILED
            break
        x[tab.basic] = xb
        low = xb < lo_ok[tab.basic]
        high = xb > hi_ok[tab.basic]
        violated = [(tab.basic[i], i) for i in np.flatnonzero(low | high)]
        if not violated:
            status = FloatStatus.FEASIBLE_GUESS
            break
        if iterations >= cap:
            status = FloatStatus.FAILED
            break
        b, i = min(violated)
        raise_b = bool(low[i])
        row = tab.T[i]
        if not np.any(np.abs(row) > cfg.tol_pivot):
            status = FloatStatus.FAILED
            break
        best = None
        for j, n in enumerate(tab.nonbasic):
            t = row[j]
            if abs(t) <= cfg.tol_pivot or (best is not None and n > best[0]):
                continue
            if (t > 0) == raise_b:
                ok = x[n] < hi[n] - hi_tol[n]
            else:
                ok = x[n] > lo[n] + lo_tol[n]
            if ok:
                best = (n, j)
        if best is None:
            status = FloatStatus.INFEASIBLE_GUESS
            break
        tab.pivot(i, best[1])
        x[b] = lo[b] if raise_b else hi[b]
        iterations += 1

    if status is FloatStatus.FAILED:
        return FloatOutcome(status, None, iterations)
    sides = {}
    for n in tab.nonbasic:
        if np.isfinite(lo[n]) and abs(x[n] - lo[n]) <= lo_tol[n]:
            sides[n] = NonbasicSide.AT_LOWER
        elif np.isfinite(hi[n]) and abs(x[n] - hi[n]) <= hi_tol[n]:
            sides[n] = NonbasicSide.AT_UPPER
        else:
            sides[n] = NonbasicSide.UNKNOWN
    hint = BasisHint(frozenset(tab.basic), sides)
    basis = (_fingerprint(fp), list(tab.basic), list(tab.nonbasic), tab.T.copy())
    return FloatOutcome(status, hint, iterations, basis)
