"""Command-line front end.

    mixsimplex FILE [--mode rational|mixed|fast] [--certify] [--stats CSV]
    mixsimplex --gen R C K --seed S [-o FILE]
    mixsimplex --bench DIR [--bench-modes rational,mixed] [-o CSV]

Exit codes: 10 sat, 20 unsat, 1 usage or parse error, 2 internal contract
violation.  In fast mode ``likely-sat`` and ``unknown`` exit with 0.

Generated instances (``--gen``): ``R`` constraints over ``x0 .. x{C-1}``,
each coefficient an independent uniform integer in ``[-K, K]`` (zeros are
dropped, an all-zero row is redrawn), relation ``<=``, right-hand side a
uniform integer in ``[-K, K]``.  Draws come from ``random.Random(seed)`` in
row-major order, coefficients first, so a seed fixes the file byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import random
import sys
import time

from .canonicalize import ParseError, build_problem, parse
from .driver import MODES, FastStatus, RunStats, decide, fast_check
from .float_lp import FloatConfig
from .simplex import ContractError
from .witness import CertificateError, Sat, format_certificate

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_USAGE = 1
EXIT_CONTRACT = 2

PUBLISHED_ZERO_EXTRA_FRACTION = 58 / 82

BENCH_FIELDS = ("file", "mode", "verdict", "float_iterations", "forced_pivots",
                "extra_rational_pivots", "promoted_value_count", "wall_time",
                "agree", "zero_extra_fraction", "published_zero_extra_fraction")


def generate(n_constraints: int, n_vars: int, coef_range: int, seed: int) -> str:
    """Random dense ``<=`` system; see the module docstring for the distribution."""
    if n_constraints < 1 or n_vars < 1 or coef_range < 1:
        raise ValueError("sizes and coefficient range must be positive")
    rng = random.Random(seed)
    lines = []
    for _ in range(n_constraints):
        while True:
            coefs = [rng.randint(-coef_range, coef_range) for _ in range(n_vars)]
            if any(coefs):
                break
        rhs = rng.randint(-coef_range, coef_range)
        terms = " ".join(f"{a} x{j}" for j, a in enumerate(coefs) if a)
        lines.append(f"{terms} <= {rhs}")
    return "\n".join(lines) + "\n"


def _verdict_name(v) -> str:
    return "sat" if isinstance(v, Sat) else "unsat"


def bench(corpus_dir: str, modes=MODES, config: FloatConfig | None = None) -> str:
    """Run every file of ``corpus_dir`` in each mode; returns CSV text.

    One row per (file, mode), files in name order.  ``agree`` says whether
    all modes gave the same verdict on that file.  A file that fails to parse
    or solve gets ``error: ...`` in the verdict column and the run goes on.
    Each mode then gets a ``SUMMARY`` row holding the fraction of solved
    instances that needed no pivot after the warm start, next to the
    published 58/82.
    """
    files = sorted(f for f in os.listdir(corpus_dir)
                   if os.path.isfile(os.path.join(corpus_dir, f)))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_FIELDS)
    if not files:
        return out.getvalue()
    zero = {m: 0 for m in modes}
    solved = {m: 0 for m in modes}
    for name in files:
        rows = []
        try:
            with open(os.path.join(corpus_dir, name)) as fh:
                p = build_problem(parse(fh.read()))
        except (OSError, ParseError, ValueError) as e:
            for m in modes:
                w.writerow([name, m, f"error: {e}", "", "", "", "", "", "", "", ""])
            continue
        for m in modes:
            try:
                v, st = decide(p, m, config)
            except (ContractError, CertificateError, ValueError) as e:
                rows.append([name, m, f"error: {e}", "", "", "", "", ""])
                continue
            solved[m] += 1
            zero[m] += st.extra_rational_pivots == 0
            rows.append([name, m, _verdict_name(v), st.float_iterations, st.forced_pivots,
                         st.extra_rational_pivots, st.promoted_value_count,
                         f"{st.wall_time:.6f}"])
        verdicts = {r[2] for r in rows}
        agree = len(verdicts) == 1 and not next(iter(verdicts)).startswith("error")
        for r in rows:
            w.writerow(r + [str(agree).lower(), "", ""])
    for m in modes:
        frac = zero[m] / solved[m] if solved[m] else 0.0
        w.writerow(["SUMMARY", m, "", "", "", "", "", "", "",
                    f"{frac:.4f}", f"{PUBLISHED_ZERO_EXTRA_FRACTION:.4f}"])
    return out.getvalue()


def _write_stats(path: str, name: str, verdict: str, st: RunStats) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(("file", "verdict") + RunStats.CSV_FIELDS)
        w.writerow([name, verdict] + st.csv_row())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mixsimplex",
        description="Decide conjunctions of linear constraints over the rationals.")
    ap.add_argument("file", nargs="?", help="constraint file, '-' for stdin")
    ap.add_argument("--mode", choices=("rational", "mixed", "fast"), default="mixed")
    ap.add_argument("--certify", action="store_true",
                    help="print the satisfying point or Farkas multipliers")
    ap.add_argument("--stats", metavar="CSV", help="append a statistics line to CSV")
    ap.add_argument("--gen", nargs=3, type=int, metavar=("R", "C", "K"),
                    help="generate R constraints over C variables, coefficients in [-K,K]")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bench", metavar="DIR", help="run every file in DIR")
    ap.add_argument("--bench-modes", default=",".join(MODES),
                    help="comma-separated modes for --bench (default: %(default)s)")
    ap.add_argument("-o", "--output", help="output file for --gen / --bench")
    ap.add_argument("--tol-feas", type=float, default=FloatConfig.tol_feas)
    ap.add_argument("--tol-pivot", type=float, default=FloatConfig.tol_pivot)
    ap.add_argument("--iter-cap", type=int, default=None,
                    help="float iteration cap (default: 20 * (rows + cols))")
    return ap


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(args) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(args)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_USAGE
    config = FloatConfig(tol_feas=ns.tol_feas, tol_pivot=ns.tol_pivot, iter_cap=ns.iter_cap)

    if ns.gen is not None:
        try:
            _emit(generate(*ns.gen, ns.seed), ns.output)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        return 0

    if ns.bench is not None:
        modes = tuple(m for m in ns.bench_modes.split(",") if m)
        if not os.path.isdir(ns.bench) or not modes or any(m not in MODES for m in modes):
            print("error: --bench needs a directory and modes from "
                  f"{', '.join(MODES)}", file=sys.stderr)
            return EXIT_USAGE
        _emit(bench(ns.bench, modes, config), ns.output)
        return 0

    if ns.file is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if ns.file == "-":
            text = sys.stdin.read()
        else:
            with open(ns.file) as fh:
                text = fh.read()
        cs = parse(text)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE

    p = build_problem(cs)
    try:
        if ns.mode == "fast":
            start = time.perf_counter()
            res = fast_check(p, config)
            print(res.status.value)
            if res.status is FastStatus.UNSAT_CERTIFIED:
                if ns.certify:
                    sys.stdout.write(format_certificate(res.verdict).split("\n", 1)[1])
                code = EXIT_UNSAT
            else:
                code = 0
            if ns.stats:
                st = RunStats("fast", wall_time=time.perf_counter() - start)
                _write_stats(ns.stats, ns.file, res.status.value, st)
            return code
        verdict, st = decide(p, ns.mode, config)
    except (ContractError, CertificateError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_CONTRACT

    if ns.certify:
        sys.stdout.write(format_certificate(verdict, p.names[:p.n_structural]))
    else:
        print(_verdict_name(verdict))
    if ns.stats:
        _write_stats(ns.stats, ns.file, _verdict_name(verdict), st)
    return EXIT_SAT if isinstance(verdict, Sat) else EXIT_UNSAT


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
