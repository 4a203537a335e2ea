"""Exact linear real arithmetic with a floating-point warm start."""

from .canonicalize import Problem, RawConstraint, build_problem, parse
from .driver import FastStatus, RunStats, decide, fast_check
from .float_lp import FloatConfig
from .numeric import DeltaRat, Rat
from .witness import Sat, Unsat, verify_sat, verify_unsat

__all__ = [
    "DeltaRat", "FastStatus", "FloatConfig", "Problem", "RawConstraint", "Rat",
    "RunStats", "Sat", "Unsat", "build_problem", "decide", "fast_check", "parse",
    "verify_sat", "verify_unsat",
]
