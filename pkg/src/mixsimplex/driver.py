"""End-to-end decision: pure rational, or float-guided then exact."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

from .canonicalize import Problem
from .float_lp import FloatConfig, FloatOutcome, FloatStatus, lower_problem, solve_float
from .forced_pivot import apply_hint_values, forced_pivot
from .numeric import promotion_count, reset_promotion_count
from .simplex import check, farkas_from_row, init, trivially_unsat_rows
from .witness import CertificateError, Sat, Unsat, verify_sat, verify_unsat

MODES = ("rational", "mixed")


@dataclass
class RunStats:
    mode: str
    float_status: str = ""
    float_iterations: int = 0
    forced_pivots: int = 0
    extra_rational_pivots: int = 0
    promoted_value_count: int = 0
    wall_time: float = 0.0
    reached_target: bool = False
    early_unsat: bool = False

    CSV_FIELDS = ("mode", "float_status", "float_iterations", "forced_pivots",
                  "extra_rational_pivots", "promoted_value_count", "wall_time")

    def csv_row(self) -> list:
        return [getattr(self, f) if f != "wall_time" else f"{self.wall_time:.6f}"
                for f in self.CSV_FIELDS]


def _usable(out: FloatOutcome, s) -> bool:
    if out.status is FloatStatus.FAILED or out.hint is None:
        return False
    target = out.hint.target_basic
    return len(target) == len(s.basic) and all(0 <= v < s.n_vars for v in target)


def decide(p: Problem, mode: str = "mixed", config: FloatConfig | None = None,
           float_solver=None, time_limit: float | None = None):
    """Decide ``p``; returns ``(Sat | Unsat, RunStats)``.

    ``float_solver(float_problem, config)`` replaces the built-in float phase,
    which is handy for testing that its output never changes the verdict.  A
    failed or malformed float result silently degrades to rational mode.
    With ``time_limit`` (seconds) the exact search may raise ``TimeLimit``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    stats = RunStats(mode)
    reset_promotion_count()
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    s = init(p)
    verdict = None

    conflicts = trivially_unsat_rows(s)
    if conflicts:
        stats.early_unsat = True
        verdict = Unsat(farkas_from_row(s, conflicts[0]))
    elif mode == "mixed" and s.basic:
        solver = float_solver or (lambda fp, cfg: solve_float(fp, config=cfg))
        out = solver(lower_problem(p), config or FloatConfig())
        stats.float_status = out.status.value
        stats.float_iterations = out.iterations
        if _usable(out, s):
            res = forced_pivot(s, out.hint)
            stats.forced_pivots = res.pivots
            stats.reached_target = res.reached
            if res.conflict is not None:
                stats.early_unsat = True
                verdict = Unsat(farkas_from_row(s, res.conflict))
            else:
                apply_hint_values(s, out.hint)

    if verdict is None:
        before = s.pivot_count
        verdict = check(s, deadline)
        stats.extra_rational_pivots = s.pivot_count - before

    if isinstance(verdict, Sat):
        if not verify_sat(verdict.point, p.constraints):
            raise CertificateError("satisfying point fails an input constraint")
    elif not verify_unsat(verdict.farkas, p.constraints):
        raise CertificateError("Farkas certificate fails on the input constraints")
    stats.promoted_value_count = promotion_count()
    stats.wall_time = time.perf_counter() - start
    return verdict, stats


class FastStatus(enum.Enum):
    LIKELY_SAT = "likely-sat"
    UNSAT_CERTIFIED = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FastResult:
    status: FastStatus
    verdict: Unsat | None = None


def fast_check(p: Problem, config: FloatConfig | None = None, float_solver=None) -> FastResult:
    """Float-only probe that may err towards satisfiability, never towards unsat.

    An infeasible float guess is confirmed by the exact pipeline before it is
    reported; an exact Sat then also comes back as LIKELY_SAT.
    """
    cfg = config or FloatConfig()
    solver = float_solver or (lambda fp, c: solve_float(fp, config=c))
    out = solver(lower_problem(p), cfg)
    if out.status is FloatStatus.FAILED:
        return FastResult(FastStatus.UNKNOWN)
    if out.status is FloatStatus.FEASIBLE_GUESS:
        return FastResult(FastStatus.LIKELY_SAT)
    verdict, _ = decide(p, "mixed", cfg, float_solver=lambda fp, c: out)
    if isinstance(verdict, Unsat):
        return FastResult(FastStatus.UNSAT_CERTIFIED, verdict)
    return FastResult(FastStatus.LIKELY_SAT)
