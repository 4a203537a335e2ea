"""Exact rationals, infinitesimal pairs and extended bounds.

``Rat`` keeps two storage tiers.  Values whose reduced numerator and
denominator fit in a signed 32-bit word live in the small tier as a pair of
plain ints; anything larger is promoted to a GMP rational (``gmpy2.mpq``).
Promotion is one way: once an operand is big, results stay big.  The tier is
never observable through arithmetic, comparison, hashing or printing.

``DeltaRat`` is ``real + eps * ε`` for an infinitesimal ``ε > 0``, ordered
lexicographically.  ``ExtBound`` adds the two infinities.
"""

from __future__ import annotations

import enum
import re
import threading
from contextlib import contextmanager
from fractions import Fraction
from math import gcd

import gmpy2
from gmpy2 import mpq

__all__ = [
    "Rat",
    "DeltaRat",
    "ExtBound",
    "BoundKind",
    "Ordering",
    "SMALL_MAX",
    "ZERO",
    "ONE",
    "DZERO",
    "rat_arith",
    "addmul",
    "delta_cmp",
    "round_to_binary64",
    "parse_rat",
    "force_big_tier",
    "promotion_count",
    "reset_promotion_count",
]

# Largest magnitude held by the small tier (signed 32-bit word).
SMALL_MAX = 2**31 - 1

_RAT_RE = re.compile(r"^([+-]?)(\d+)(?:/(\d+))?$")

_mpq_type = type(mpq(0))


class _Counters(threading.local):
    def __init__(self):
        self.promotions = 0
        self.force_big = False


_state = _Counters()


def promotion_count() -> int:
    """Number of small-tier results promoted to the big tier in this thread."""
    return _state.promotions


def reset_promotion_count() -> None:
    _state.promotions = 0


@contextmanager
def force_big_tier():
    """Route every value constructed inside the block through the big tier."""
    prev = _state.force_big
    _state.force_big = True
    try:
        yield
    finally:
        _state.force_big = prev


def _fits(n: int, d: int) -> bool:
    return -SMALL_MAX <= n <= SMALL_MAX and d <= SMALL_MAX


class Rat:
    """Exact rational number, always stored in lowest terms with d > 0.

    >>> Rat(1, 2) + Rat(1, 3)
    Rat(5, 6)
    >>> Rat(SMALL_MAX) + Rat(1)
    Rat(2147483648, 1)
    """

    __slots__ = ("_n", "_d", "_q")

    def __init__(self, numerator=0, denominator=1):
        if isinstance(numerator, Rat) and denominator == 1:
            self._n, self._d, self._q = numerator._n, numerator._d, numerator._q
            return
        if isinstance(numerator, (Fraction, _mpq_type)):
            q = mpq(numerator) / denominator
            n, d = int(q.numerator), int(q.denominator)
        else:
            n, d = int(numerator), int(denominator)
            if d == 0:
                raise ZeroDivisionError("Rat with zero denominator")
            if d < 0:
                n, d = -n, -d
            g = gcd(n, d)
            if g != 1:
                n //= g
                d //= g
        if _state.force_big or not _fits(n, d):
            self._n = self._d = None
            self._q = mpq(n, d)
        else:
            self._n, self._d, self._q = n, d, None

    # construction helpers used on hot paths: arguments already reduced
    @classmethod
    def _small(cls, n: int, d: int) -> "Rat":
        r = object.__new__(cls)
        r._n, r._d, r._q = n, d, None
        return r

    @classmethod
    def _big(cls, q) -> "Rat":
        r = object.__new__(cls)
        r._n = r._d = None
        r._q = q
        return r

    @classmethod
    def _reduced(cls, n: int, d: int) -> "Rat":
        """Wrap an already-reduced pair, promoting when it does not fit."""
        if _state.force_big:
            return cls._big(mpq(n, d))
        if -SMALL_MAX <= n <= SMALL_MAX and d <= SMALL_MAX:
            return cls._small(n, d)
        _state.promotions += 1
        return cls._big(mpq(n, d))

    @classmethod
    def parse(cls, text: str) -> "Rat":
        return parse_rat(text)

    @property
    def is_big(self) -> bool:
        return self._q is not None

    @property
    def numerator(self) -> int:
        return self._n if self._q is None else int(self._q.numerator)

    @property
    def denominator(self) -> int:
        return self._d if self._q is None else int(self._q.denominator)

    def as_mpq(self):
        return mpq(self._n, self._d) if self._q is None else self._q

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def is_zero(self) -> bool:
        return self._n == 0 if self._q is None else self._q == 0

    def sign(self) -> int:
        if self._q is None:
            n = self._n
        else:
            n = self._q
        return (n > 0) - (n < 0)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        try:
            oq = other._q
        except AttributeError:
            if not isinstance(other, int):
                return NotImplemented
            other = Rat(other)
            oq = other._q
        q = self._q
        if q is None and oq is None:
            an, ad, bn, bd = self._n, self._d, other._n, other._d
            if ad == bd:
                n = an + bn
                if ad == 1:
                    return Rat._reduced(n, 1)
                g = gcd(n, ad)
                return Rat._reduced(n // g, ad // g)
            g = gcd(ad, bd)
            if g == 1:
                return Rat._reduced(an * bd + bn * ad, ad * bd)
            s = ad // g
            t = an * (bd // g) + bn * s
            g2 = gcd(t, g)
            return Rat._reduced(t // g2, s * (bd // g2))
        r = object.__new__(Rat)
        r._n = r._d = None
        r._q = ((q if q is not None else mpq(self._n, self._d))
                + (oq if oq is not None else mpq(other._n, other._d)))
        return r

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Rat):
            if isinstance(other, int):
                other = Rat(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        if self._q is None:
            return Rat._small(-self._n, self._d)
        return Rat._big(-self._q)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __mul__(self, other):
        try:
            oq = other._q
        except AttributeError:
            if not isinstance(other, int):
                return NotImplemented
            other = Rat(other)
            oq = other._q
        q = self._q
        if q is None and oq is None:
            an, ad, bn, bd = self._n, self._d, other._n, other._d
            g1 = gcd(an, bd)
            g2 = gcd(bn, ad)
            return Rat._reduced((an // g1) * (bn // g2), (ad // g2) * (bd // g1))
        r = object.__new__(Rat)
        r._n = r._d = None
        r._q = ((q if q is not None else mpq(self._n, self._d))
                * (oq if oq is not None else mpq(other._n, other._d)))
        return r

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Rat):
            if isinstance(other, int):
                other = Rat(other)
            else:
                return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("Rat division by zero")
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return Rat(other) / self

    def reciprocal(self) -> "Rat":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero")
        if self._q is None:
            n, d = self._n, self._d
            if n < 0:
                return Rat._small(-d, -n)
            return Rat._small(d, n)
        return Rat._big(1 / self._q)

    # comparison ---------------------------------------------------------

    def _cmp_key(self, other):
        if isinstance(other, int):
            other = Rat(other)
        if not isinstance(other, Rat):
            return None
        if self._q is None and other._q is None:
            return self._n * other._d, other._n * self._d
        return self.as_mpq(), other.as_mpq()

    def __eq__(self, other):
        k = self._cmp_key(other)
        if k is None:
            if isinstance(other, Fraction):
                return self.as_fraction() == other
            return NotImplemented
        return k[0] == k[1]

    def __lt__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] < k[1]

    def __le__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] <= k[1]

    def __gt__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] > k[1]

    def __ge__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] >= k[1]

    def __hash__(self):
        return hash(Fraction(self.numerator, self.denominator))

    def __bool__(self):
        return not self.is_zero()

    def __float__(self):
        return _int_ratio_to_float(self.numerator, self.denominator)

    def __str__(self):
        n, d = self.numerator, self.denominator
        return str(n) if d == 1 else f"{n}/{d}"

    def __repr__(self):
        return f"Rat({self.numerator}, {self.denominator})"

    def __reduce__(self):
        return (Rat, (self.numerator, self.denominator))


ZERO = Rat(0)
ONE = Rat(1)


def addmul(a: Rat, b: Rat, c: Rat) -> Rat:
    """``a + b * c`` with a single big-tier wrapper when any operand is big."""
    if a._q is None and b._q is None and c._q is None:
        return a + b * c
    r = object.__new__(Rat)
    r._n = r._d = None
    r._q = a.as_mpq() + b.as_mpq() * c.as_mpq()
    return r


def parse_rat(text: str) -> Rat:
    """Parse ``[+-]int[/posint]``; raises ValueError on anything else."""
    m = _RAT_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a rational literal: {text!r}")
    sign, num, den = m.groups()
    d = int(den) if den is not None else 1
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    n = int(num)
    return Rat(-n if sign == "-" else n, d)


def rat_arith(op: str, x: Rat, y: Rat) -> Rat:
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "*":
        return x * y
    if op == "/":
        return x / y
    raise ValueError(f"unknown operator {op!r}")


def _int_ratio_to_float(n: int, d: int) -> float:
    # int / int is correctly rounded (nearest, ties to even) in CPython
    try:
        return n / d
    except OverflowError:
        return float("inf") if n > 0 else float("-inf")


class Ordering(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class DeltaRat:
    """``real + eps*ε`` with lexicographic order; an ordered Q-vector space."""

    __slots__ = ("real", "eps")

    def __init__(self, real=ZERO, eps=ZERO):
        self.real = real if isinstance(real, Rat) else Rat(real)
        self.eps = eps if isinstance(eps, Rat) else Rat(eps)

    def __add__(self, other: "DeltaRat") -> "DeltaRat":
        if self.eps.is_zero() and other.eps.is_zero():
            return DeltaRat(self.real + other.real, ZERO)
        return DeltaRat(self.real + other.real, self.eps + other.eps)

    def __sub__(self, other: "DeltaRat") -> "DeltaRat":
        if self.eps.is_zero() and other.eps.is_zero():
            return DeltaRat(self.real - other.real, ZERO)
        return DeltaRat(self.real - other.real, self.eps - other.eps)

    def __neg__(self) -> "DeltaRat":
        return DeltaRat(-self.real, -self.eps)

    def scale(self, k: Rat) -> "DeltaRat":
        if self.eps.is_zero():
            return DeltaRat(self.real * k, ZERO)
        return DeltaRat(self.real * k, self.eps * k)

    def __mul__(self, k):
        if isinstance(k, (Rat, int)):
            return self.scale(k if isinstance(k, Rat) else Rat(k))
        return NotImplemented

    __rmul__ = __mul__

    def cmp(self, other: "DeltaRat") -> int:
        if self.real != other.real:
            return -1 if self.real < other.real else 1
        if self.eps != other.eps:
            return -1 if self.eps < other.eps else 1
        return 0

    def __eq__(self, other):
        if not isinstance(other, DeltaRat):
            return NotImplemented
        return self.real == other.real and self.eps == other.eps

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __hash__(self):
        return hash((self.real, self.eps))

    def __str__(self):
        if self.eps.is_zero():
            return str(self.real)
        sign = "-" if self.eps.sign() < 0 else "+"
        return f"{self.real}{sign}{abs(self.eps)}ε"

    def __repr__(self):
        return f"DeltaRat({self.real!s}, {self.eps!s})"


DZERO = DeltaRat(ZERO, ZERO)


def delta_cmp(x: DeltaRat, y: DeltaRat) -> Ordering:
    return Ordering(x.cmp(y))


def round_to_binary64(x) -> float:
    """Nearest binary64 to the real part; the infinitesimal is dropped."""
    if isinstance(x, DeltaRat):
        x = x.real
    return float(x)


class BoundKind(enum.IntEnum):
    MINUS_INF = -1
    FINITE = 0
    PLUS_INF = 1


class ExtBound:
    """A DeltaRat or one of the two infinities, totally ordered."""

    __slots__ = ("kind", "value")

    def __init__(self, kind: BoundKind, value: DeltaRat | None = None):
        if (kind is BoundKind.FINITE) != (value is not None):
            raise ValueError("a finite bound needs a value, an infinite one must not have one")
        self.kind = kind
        self.value = value

    @classmethod
    def finite(cls, value: DeltaRat) -> "ExtBound":
        return cls(BoundKind.FINITE, value)

    @classmethod
    def minus_inf(cls) -> "ExtBound":
        return cls(BoundKind.MINUS_INF)

    @classmethod
    def plus_inf(cls) -> "ExtBound":
        return cls(BoundKind.PLUS_INF)

    @property
    def is_finite(self) -> bool:
        return self.kind is BoundKind.FINITE

    def cmp(self, other: "ExtBound") -> int:
        if self.kind is not other.kind or not self.is_finite:
            return (self.kind > other.kind) - (self.kind < other.kind)
        return self.value.cmp(other.value)

    def __eq__(self, other):
        if not isinstance(other, ExtBound):
            return NotImplemented
        return self.cmp(other) == 0

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __hash__(self):
        return hash((self.kind, self.value))

    def __repr__(self):
        if self.is_finite:
            return f"ExtBound({self.value})"
        return "ExtBound(-inf)" if self.kind is BoundKind.MINUS_INF else "ExtBound(+inf)"
