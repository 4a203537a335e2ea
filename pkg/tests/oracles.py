"""Reference deciders that share no code with the solver.

Everything here uses :class:`fractions.Fraction` and plain dicts.
"""

from __future__ import annotations

import random
from fractions import Fraction

from mixsimplex.canonicalize import RawConstraint, Relation, parse


def _oriented(c: RawConstraint):
    """(coefs, const, kind) meaning ``coefs.x kind const``, kind in <=, <, =."""
    coefs = {v: Fraction(a.numerator, a.denominator) for v, a in c.terms.items()}
    const = Fraction(c.rhs.numerator, c.rhs.denominator)
    rel = c.relation
    if rel in (Relation.GE, Relation.GT):
        coefs = {v: -a for v, a in coefs.items()}
        const = -const
        rel = Relation.LE if rel is Relation.GE else Relation.LT
    kind = {Relation.LE: "<=", Relation.LT: "<", Relation.EQ: "="}[rel]
    return coefs, const, kind


def _trivially_false(const: Fraction, kind: str) -> bool:
    # 0 kind const
    return {"<=": const < 0, "<": const <= 0, "=": const != 0}[kind]


def _substitute(row, var, expr):
    """Replace ``var`` in ``row`` by ``expr = (coefs, const)`` meaning var = coefs.x + const."""
    coefs, const, kind = row
    a = coefs.get(var)
    if a is None:
        return row
    coefs = dict(coefs)
    del coefs[var]
    for v, b in expr[0].items():
        coefs[v] = coefs.get(v, Fraction(0)) + a * b
    coefs = {v: b for v, b in coefs.items() if b != 0}
    return coefs, const - a * expr[1], kind


def _normalized_key(coefs):
    first = min(coefs)
    scale = abs(coefs[first])
    return tuple(sorted((v, a / scale) for v, a in coefs.items())), scale


def fm_feasible(cs: list[RawConstraint]) -> bool:
    """Plain Fourier-Motzkin elimination with duplicate-direction pruning.

    Sizes here are tiny, so no redundancy criterion beyond keeping the
    tightest inequality per direction is applied; that keeps the oracle
    obviously correct.
    """
    rows = [_oriented(c) for c in cs]

    # equalities: Gaussian substitution
    while True:
        eq = next((r for r in rows if r[2] == "=" and r[0]), None)
        if eq is None:
            break
        coefs, const, _ = eq
        var = min(coefs)
        a = coefs[var]
        expr = ({v: -b / a for v, b in coefs.items() if v != var}, const / a)
        rows = [_substitute(r, var, expr) for r in rows if r is not eq]

    ineqs = []
    for coefs, const, kind in rows:
        if not coefs:
            if _trivially_false(const, kind):
                return False
            continue
        ineqs.append((coefs, const, kind == "<"))

    while True:
        ineqs = _prune(ineqs)
        variables = set()
        for coefs, _, _ in ineqs:
            variables.update(coefs)
        if not variables:
            return True

        def cost(v):
            pos = sum(1 for r in ineqs if r[0].get(v, 0) > 0)
            neg = sum(1 for r in ineqs if r[0].get(v, 0) < 0)
            return pos * neg - pos - neg, v

        var = min(variables, key=cost)
        pos = [r for r in ineqs if r[0].get(var, 0) > 0]
        neg = [r for r in ineqs if r[0].get(var, 0) < 0]
        rest = [r for r in ineqs if var not in r[0]]
        for p in pos:
            for n in neg:
                ap, an = p[0][var], -n[0][var]
                coefs = {}
                for v in set(p[0]) | set(n[0]):
                    if v == var:
                        continue
                    b = an * p[0].get(v, 0) + ap * n[0].get(v, 0)
                    if b != 0:
                        coefs[v] = b
                const = an * p[1] + ap * n[1]
                strict = p[2] or n[2]
                if not coefs:
                    if (const <= 0) if strict else (const < 0):
                        return False
                    continue
                rest.append((coefs, const, strict))
        ineqs = rest


def _prune(ineqs):
    """Keep the tightest inequality per direction."""
    best = {}
    for coefs, const, strict in ineqs:
        key, scale = _normalized_key(coefs)
        c = const / scale
        cur = best.get(key)
        if cur is None or c < cur[0] or (c == cur[0] and strict and not cur[1]):
            best[key] = (c, strict)
    return [(dict(k), c, strict) for k, (c, strict) in best.items()]


def rank(matrix) -> int:
    m = [list(map(Fraction, row)) for row in matrix]
    r = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
    return r


def partition_feasible_oracle(rows: dict, target_basic, n_vars: int) -> bool:
    """Can ``target_basic`` be the basic set of a tableau for the same subspace?

    The subspace is parametrized by the current nonbasic variables; the
    target works iff its nonbasic variables also parametrize it, i.e. the
    map from current to target nonbasic coordinates is invertible.
    """
    nonbasic = [v for v in range(n_vars) if v not in rows]
    target_nonbasic = [v for v in range(n_vars) if v not in set(target_basic)]
    if len(target_nonbasic) != len(nonbasic):
        return False
    if not nonbasic:
        return True
    matrix = []
    for v in target_nonbasic:
        if v in rows:
            matrix.append([Fraction(rows[v].get(n, 0)) for n in nonbasic])
        else:
            matrix.append([Fraction(int(n == v)) for n in nonbasic])
    return rank(matrix) == len(nonbasic)


# random corpora --------------------------------------------------------

def small_instance_text(rng: random.Random, max_vars=6, max_cons=10, coef=5) -> str:
    """Small mixed system: ~25% strict, ~10% equalities, coefficients in [-coef, coef]."""
    n_vars = rng.randint(1, max_vars)
    names = [f"x{i}" for i in range(n_vars)]
    lines = []
    for _ in range(rng.randint(1, max_cons)):
        k = rng.randint(1, n_vars)
        chosen = rng.sample(names, k)
        terms = []
        for v in chosen:
            a = 0
            while a == 0:
                a = rng.randint(-coef, coef)
            terms.append(f"{a} {v}")
        u = rng.random()
        if u < 0.10:
            rel = "="
        elif u < 0.35:
            rel = rng.choice(["<", ">"])
        else:
            rel = rng.choice(["<=", ">="])
        lines.append(f"{' '.join(terms)} {rel} {rng.randint(-coef, coef)}")
    return "\n".join(lines) + "\n"


def small_corpus(n: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    return [parse(small_instance_text(rng)) for _ in range(n)]
