"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The dense suite (100 generated instances of 100 inequalities over 50
variables) is solved once and shared by criteria 2, 3 and 4.
"""

import itertools
import random
import statistics
import time

import pytest

from conftest import report
from oracles import fm_feasible, partition_feasible_oracle, small_corpus

from mixsimplex.canonicalize import RawConstraint, Relation, Side, build_problem, parse
from mixsimplex.cli import PUBLISHED_ZERO_EXTRA_FRACTION, generate
from mixsimplex.driver import decide
from mixsimplex.float_lp import FloatOutcome, FloatStatus
from mixsimplex.forced_pivot import BasisHint, NonbasicSide, forced_pivot
from mixsimplex.numeric import DeltaRat, Rat
from mixsimplex.simplex import (SolverState, TimeLimit, assert_bound, check, mark,
                                retract_to)
from mixsimplex.witness import Sat, Unsat, verify_sat, verify_unsat

N_SMALL = 1000
N_DENSE = 100


@pytest.fixture(scope="module")
def corpus():
    return small_corpus(N_SMALL, seed=2024)


@pytest.fixture(scope="module")
def small_results(corpus):
    """Verdicts of both modes on the small corpus, with the elapsed time."""
    start = time.perf_counter()
    out = []
    for cs in corpus:
        p = build_problem(cs)
        out.append({m: decide(p, m)[0] for m in ("rational", "mixed")})
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def dense_suite():
    start = time.perf_counter()
    runs = []
    for seed in range(N_DENSE):
        cs = parse(generate(100, 50, 100, seed))
        v, st = decide(build_problem(cs), "mixed")
        runs.append((cs, v, st))
    return runs, time.perf_counter() - start


def _verdict_ok(v, cs) -> bool:
    if isinstance(v, Sat):
        return verify_sat(v.point, cs)
    return verify_unsat(v.farkas, cs)


# 1 ----------------------------------------------------------------------

def test_c1_soundness_vs_fourier_motzkin(corpus, small_results):
    results, elapsed = small_results
    agree = 0
    for cs, r in zip(corpus, results):
        truth = fm_feasible(cs)
        agree += all(isinstance(v, Sat) == truth for v in r.values())
    ok = agree == len(corpus) and elapsed < 60
    report("C1 soundness", ok,
           f"{agree}/{len(corpus)} agree with FM in both modes, solver time {elapsed:.1f}s (< 60s)")
    assert agree == len(corpus)
    assert elapsed < 60


# 2 ----------------------------------------------------------------------

def test_c2_certificates(corpus, small_results, dense_suite):
    results, _ = small_results
    checked = good = 0
    for cs, r in zip(corpus, results):
        for v in r.values():
            checked += 1
            good += _verdict_ok(v, cs)
    runs, _ = dense_suite
    for cs, v, _ in runs:
        checked += 1
        good += _verdict_ok(v, cs)
    report("C2 certificates", good == checked, f"{good}/{checked} verdicts verified")
    assert good == checked


# 3 ----------------------------------------------------------------------

def test_c3_zero_extra_pivots(dense_suite):
    runs, elapsed = dense_suite
    zero = sum(st.extra_rational_pivots == 0 for _, _, st in runs)
    n_sat = sum(isinstance(v, Sat) for _, v, _ in runs)
    frac = zero / len(runs)
    ok = frac >= 0.5 and elapsed < 600
    report("C3 warm start", ok,
           f"zero extra pivots on {zero}/{len(runs)} = {frac:.0%} (>= 50%; published "
           f"{PUBLISHED_ZERO_EXTRA_FRACTION:.0%}), {n_sat} sat / {len(runs) - n_sat} unsat, "
           f"{elapsed:.0f}s (< 600s)")
    assert frac >= 0.5
    assert elapsed < 600


# 4 ----------------------------------------------------------------------

def test_c4_speedup(dense_suite):
    """Median mixed time <= half the median rational time.

    Rational runs are stopped at twice the mixed median: a stopped run is
    known to exceed that bound, which is all the inequality needs.  Once more
    than half the suite has been stopped the rational median provably exceeds
    it and the remaining instances are skipped.
    """
    runs, _ = dense_suite
    mixed_median = statistics.median(st.wall_time for _, _, st in runs)
    cap = 2 * mixed_median
    times = []
    censored = 0
    for cs, _, _ in runs:
        if censored > len(runs) // 2:
            break
        try:
            _, st = decide(build_problem(cs), "rational", time_limit=cap)
            times.append(st.wall_time)
        except TimeLimit:
            censored += 1
    if censored > len(runs) // 2:
        ok = True
        detail = (f"{censored} of {len(times) + censored} rational runs exceeded "
                  f"{cap:.2f}s = 2 x mixed median {mixed_median:.2f}s, so the "
                  f"rational median over {len(runs)} exceeds it")
    else:
        rational = times + [float("inf")] * censored
        rat_median = statistics.median(rational)
        ok = mixed_median <= 0.5 * rat_median
        detail = f"mixed median {mixed_median:.2f}s, rational median {rat_median:.2f}s"
    report("C4 speedup", ok, detail)
    assert ok


# 5 ----------------------------------------------------------------------

def _random_rows(rng, n_basic, n_nonbasic, coef=2, nonempty=False):
    basic = list(range(n_basic))
    nonbasic = list(range(n_basic, n_basic + n_nonbasic))
    rows = {}
    for b in basic:
        while True:
            r = {n: rng.randint(-coef, coef) for n in nonbasic}
            rows[b] = {n: c for n, c in r.items() if c}
            if rows[b] or not nonempty:
                break
    return rows


def _lemma_case(rows, n_vars, target) -> bool:
    s = SolverState.from_rows(rows, n_vars)
    res = forced_pivot(s, BasisHint(frozenset(target)), early_exit=False)
    return bool(res) == partition_feasible_oracle(rows, target, n_vars)


def test_c5_forced_pivot_lemma():
    rng = random.Random(5)
    sampled = agree = 0
    while sampled < 10_000:
        nb, nn = rng.randint(1, 4), rng.randint(1, 5)
        rows = _random_rows(rng, nb, nn)
        target = rng.sample(range(nb + nn), nb)
        sampled += 1
        agree += _lemma_case(rows, nb + nn, target)

    exhaustive = ex_agree = 0
    for total in range(2, 7):
        for nb in range(1, total):
            for _ in range(20):
                rows = _random_rows(rng, nb, total - nb)
                for target in itertools.combinations(range(total), nb):
                    exhaustive += 1
                    ex_agree += _lemma_case(rows, total, target)
    ok = agree == sampled and ex_agree == exhaustive
    report("C5 forced-pivot lemma", ok,
           f"sampled {agree}/{sampled}, exhaustive partitions {ex_agree}/{exhaustive}")
    assert ok


# 6 ----------------------------------------------------------------------

def _failed_stub(fp, cfg):
    return FloatOutcome(FloatStatus.FAILED, None, 0)


def _adversarial_stub(seed):
    rng = random.Random(seed)

    def stub(fp, cfg):
        target = frozenset(rng.sample(range(fp.n_vars), len(fp.basic)))
        sides = {v: rng.choice(list(NonbasicSide)) for v in range(fp.n_vars) if v not in target}
        status = rng.choice([FloatStatus.FEASIBLE_GUESS, FloatStatus.INFEASIBLE_GUESS])
        return FloatOutcome(status, BasisHint(target, sides), rng.randint(0, 50))
    return stub


def test_c6_float_phase_irrelevant(corpus, small_results):
    results, _ = small_results
    same_failed = same_adv = 0
    adversary = _adversarial_stub(6)
    for cs, r in zip(corpus, results):
        p = build_problem(cs)
        expected = isinstance(r["mixed"], Sat)
        same_failed += isinstance(decide(p, "mixed", float_solver=_failed_stub)[0], Sat) == expected
        same_adv += isinstance(decide(p, "mixed", float_solver=adversary)[0], Sat) == expected
    ok = same_failed == same_adv == len(corpus)
    report("C6 float irrelevance", ok,
           f"failed stub {same_failed}/{len(corpus)}, adversarial stub {same_adv}/{len(corpus)}")
    assert ok


# 7 ----------------------------------------------------------------------

def _bound_constraint(var, side, value: DeltaRat, cid) -> RawConstraint:
    strict = not value.eps.is_zero()
    if side is Side.UPPER:
        rel = Relation.LT if strict else Relation.LE
    else:
        rel = Relation.GT if strict else Relation.GE
    return RawConstraint({f"v{var}": Rat(1)}, rel, value.real, cid)


def _scratch_feasible(rows, active) -> bool:
    cs = []
    for b, r in rows.items():
        terms = {f"v{b}": Rat(1)}
        for n, c in r.items():
            terms[f"v{n}"] = Rat(-c)
        cs.append(RawConstraint(terms, Relation.EQ, Rat(0), len(cs)))
    for var, side, value in active:
        cs.append(_bound_constraint(var, side, value, len(cs)))
    return fm_feasible(cs)


def test_c7_incremental():
    rng = random.Random(7)
    checks = agree = 0
    for script in range(200):
        nb, nn = rng.randint(1, 3), rng.randint(1, 3)
        rows = _random_rows(rng, nb, nn, coef=3, nonempty=True)
        n_vars = nb + nn
        s = SolverState.from_rows(rows, n_vars)
        stack = []   # (trail mark, assertion) per pushed assertion
        for event in range(rng.randint(1, 30)):
            u = rng.random()
            if u < 0.5:
                var = rng.randrange(n_vars)
                side = rng.choice([Side.LOWER, Side.UPPER])
                value = DeltaRat(Rat(rng.randint(-6, 6), rng.randint(1, 2)),
                                 rng.choice([0, 0, 1 if side is Side.LOWER else -1]))
                depth = mark(s)
                assert_bound(s, var, side, value, ("a", script, event))
                stack.append((depth, (var, side, value)))
            elif u < 0.7 and stack:
                k = rng.randrange(len(stack))
                retract_to(s, stack[k][0])
                del stack[k:]
            else:
                checks += 1
                got = isinstance(check(s), Sat)
                agree += got == _scratch_feasible(rows, [a for _, a in stack])
    ok = agree == checks
    report("C7 incrementality", ok, f"{agree}/{checks} checks match from-scratch solves")
    assert ok


# 8 ----------------------------------------------------------------------

def test_c8_worked_example(example_text):
    cs = parse(example_text)
    p = build_problem(cs)
    verdicts = {m: decide(p, m)[0] for m in ("rational", "mixed")}
    unsat = all(isinstance(v, Unsat) and verify_unsat(v.farkas, cs) for v in verdicts.values())
    stated = verify_unsat({0: Rat(1), 1: Rat(2), 2: Rat(1)}, cs)
    report("C8 worked example", unsat and stated,
           f"unsat with verified certificate in both modes "
           f"({ {k: str(q) for k, q in sorted(verdicts['mixed'].farkas.items())} }); "
           f"{{c1:1, c2:2, c3:1}} accepted: {stated}")
    assert unsat and stated
