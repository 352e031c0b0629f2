"""Adaptive-precision dyadic interval arithmetic.

``DyInterval`` wraps the kernel 4-tuples ``(lo_man, lo_exp, hi_man,
hi_exp)`` with exact dyadic endpoints.  Ring operations round outward at
the ambient precision (see :func:`bits`); elementary functions (exp,
log, sin, cos, sqrt, atan2, pi) delegate to mpmath's interval context,
whose endpoints are themselves exact dyadics, so every enclosure here is
mathematically rigorous.

All certified sign claims follow the one-sided-safe rule: a sign is only
reported once the interval excludes zero.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from fractions import Fraction

import mpmath
from mpmath.libmp import from_man_exp

from . import _kernel as K

_DEFAULT_BITS = int(os.environ.get("REACH_BITS", "160"))
_BITS = [_DEFAULT_BITS]


def getbits() -> int:
    """Current ambient mantissa precision in bits."""
    return _BITS[-1]


@contextmanager
def bits(p: int):
    """Temporarily set the ambient precision."""
    if p < 8:
        raise ValueError("precision too small")
    _BITS.append(p)
    try:
        yield
    finally:
        _BITS.pop()


class PrecisionError(ArithmeticError):
    """A certified result could not be produced within the bit budget."""


def _bound_to_fraction(m: int, e: int) -> Fraction:
    if e >= 0:
        return Fraction(m << e)
    return Fraction(m, 1 << (-e))


def _fraction_bounds(x: Fraction, prec: int):
    """Directed dyadic bounds (lo, hi) for a rational, each within 2^-prec rel."""
    p, q = x.numerator, x.denominator
    if q == 1:
        return (p, 0), (p, 0)
    s = max(0, prec + 2 - (abs(p).bit_length() - q.bit_length()))
    lo = (p << s) // q          # floor
    hi = -((-(p << s)) // q)    # ceil
    return (lo, -s), (hi, -s)


def _to_mpf(m: int, e: int):
    if m == 0:
        return mpmath.mpf(0)
    with mpmath.workprec(abs(m).bit_length() + 8):
        return mpmath.mpf(from_man_exp(m, e))


def _from_mpf(v) -> tuple:
    sign, man, exp, bc = v._mpf_
    man = int(man)
    if man == 0:
        if v == 0:
            return (0, 0)
        raise PrecisionError("non-finite bound from mpmath: %r" % (v,))
    return (-man if sign else man, int(exp))


class DyInterval:
    """Closed interval with exact dyadic endpoints."""

    __slots__ = ("t",)

    def __init__(self, t):
        if t[0] != 0 or t[2] != 0:
            if K.be_cmp(t[0], t[1], t[2], t[3]) > 0:
                raise ValueError("inverted interval %r" % (t,))
        self.t = t

    # -- constructors ---------------------------------------------------

    @classmethod
    def exact(cls, man: int, exp: int = 0) -> "DyInterval":
        return cls((man, exp, man, exp))

    @classmethod
    def from_fraction(cls, x, prec: int | None = None) -> "DyInterval":
        x = Fraction(x)
        (lm, le), (hm, he) = _fraction_bounds(x, prec or getbits())
        return cls((lm, le, hm, he))

    @classmethod
    def from_endpoints(cls, lo, hi, prec: int | None = None) -> "DyInterval":
        p = prec or getbits()
        (lm, le), _ = _fraction_bounds(Fraction(lo), p)
        _, (hm, he) = _fraction_bounds(Fraction(hi), p)
        return cls((lm, le, hm, he))

    @classmethod
    def ball(cls, center, radius) -> "DyInterval":
        c, r = Fraction(center), Fraction(radius)
        return cls.from_endpoints(c - r, c + r)

    @classmethod
    def pi(cls, prec: int | None = None) -> "DyInterval":
        p = prec or getbits()
        old = mpmath.iv.prec
        try:
            mpmath.iv.prec = p + 8
            lo, hi = mpmath.iv.pi._mpi_
        finally:
            mpmath.iv.prec = old
        return cls(_mpi_to_tuple(lo, hi))

    # -- accessors ------------------------------------------------------

    @property
    def lo(self) -> Fraction:
        return _bound_to_fraction(self.t[0], self.t[1])

    @property
    def hi(self) -> Fraction:
        return _bound_to_fraction(self.t[2], self.t[3])

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def rad(self) -> Fraction:
        return self.width / 2

    def __repr__(self):
        return "DyInterval[%s, %s]" % (float(self.lo), float(self.hi))

    def __float__(self):
        return float(self.mid)

    # -- predicates -----------------------------------------------------

    def contains_zero(self) -> bool:
        return self.t[0] <= 0 <= self.t[2]

    def contains(self, x) -> bool:
        if isinstance(x, DyInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = Fraction(x)
        return self.lo <= x <= self.hi

    def sign(self) -> int:
        """Certified sign: 0 means the interval straddles (or touches) zero."""
        if self.t[0] > 0:
            return 1
        if self.t[2] < 0:
            return -1
        return 0

    def lt(self, other: "DyInterval") -> bool:
        """Certified strict less-than."""
        return K.be_cmp(self.t[2], self.t[3], other.t[0], other.t[1]) < 0

    def overlaps(self, other: "DyInterval") -> bool:
        return not (self.lt(other) or other.lt(self))

    def hull(self, other: "DyInterval") -> "DyInterval":
        a = self.t if self.lo <= other.lo else other.t
        b = self.t if self.hi >= other.hi else other.t
        return DyInterval((a[0], a[1], b[2], b[3]))

    # -- ring ops -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, DyInterval):
            return other
        if isinstance(other, int):
            return DyInterval.exact(other)
        if isinstance(other, Fraction):
            return DyInterval.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DyInterval(K.iv_add(self.t, o.t, getbits()))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DyInterval(K.iv_sub(self.t, o.t, getbits()))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DyInterval(K.iv_sub(o.t, self.t, getbits()))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return DyInterval(K.iv_mul(self.t, o.t, getbits()))

    __rmul__ = __mul__

    def __neg__(self):
        return DyInterval(K.iv_neg(self.t))

    def __abs__(self):
        if self.t[0] >= 0:
            return self
        if self.t[2] <= 0:
            return -self
        hi = max(-self.lo, self.hi)
        return DyInterval.from_endpoints(Fraction(0), hi)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if k == 0:
            return DyInterval.exact(1)
        if k % 2 == 0 and self.contains_zero():
            m = abs(self)
            acc = m
            for _ in range(k - 1):
                acc = acc * m
            return DyInterval((0, 0, acc.t[2], acc.t[3]))
        acc = self
        for _ in range(k - 1):
            acc = acc * self
        return acc

    def recip(self) -> "DyInterval":
        if self.contains_zero():
            raise ZeroDivisionError("interval contains zero")
        p = getbits()
        lo = _div_frac(Fraction(1), self.hi, p, down=True)
        hi = _div_frac(Fraction(1), self.lo, p, down=False)
        return DyInterval((lo[0], lo[1], hi[0], hi[1]))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.recip()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.recip()

    def scale2(self, k: int) -> "DyInterval":
        return DyInterval(K.iv_scale2(self.t, k))

    def widen(self, radius) -> "DyInterval":
        r = Fraction(radius)
        return DyInterval.from_endpoints(self.lo - r, self.hi + r)

    # -- elementary functions --------------------------------------------

    def _mpi(self):
        return mpmath.iv.mpf([_to_mpf(self.t[0], self.t[1]),
                              _to_mpf(self.t[2], self.t[3])])

    def _elem(self, name: str) -> "DyInterval":
        old = mpmath.iv.prec
        try:
            mpmath.iv.prec = getbits() + 8
            v = getattr(mpmath.iv, name)(self._mpi())
            lo, hi = v._mpi_
        finally:
            mpmath.iv.prec = old
        return DyInterval(_mpi_to_tuple(lo, hi))

    def exp(self) -> "DyInterval":
        return self._elem("exp")

    def log(self) -> "DyInterval":
        if self.t[0] <= 0:
            raise ValueError("log of interval touching (-inf, 0]")
        return self._elem("log")

    def sin(self) -> "DyInterval":
        return self._elem("sin")

    def cos(self) -> "DyInterval":
        return self._elem("cos")

    def sqrt(self) -> "DyInterval":
        if self.t[0] < 0:
            raise ValueError("sqrt of interval with negative part")
        return self._elem("sqrt")

    @staticmethod
    def atan2(y: "DyInterval", x: "DyInterval") -> "DyInterval":
        old = mpmath.iv.prec
        try:
            mpmath.iv.prec = getbits() + 8
            v = mpmath.iv.atan2(y._mpi(), x._mpi())
            lo, hi = v._mpi_
        finally:
            mpmath.iv.prec = old
        return DyInterval(_mpi_to_tuple(lo, hi))


def _mpi_to_tuple(lo, hi) -> tuple:
    lm, le = _from_mpf_tuple(lo)
    hm, he = _from_mpf_tuple(hi)
    return (lm, le, hm, he)


def _from_mpf_tuple(t) -> tuple:
    sign, man, exp, bc = t
    man = int(man)
    if man == 0:
        if exp == 0:
            return (0, 0)
        raise PrecisionError("non-finite mpmath bound")
    return (-man if sign else man, int(exp))


def _div_frac(num: Fraction, den: Fraction, prec: int, down: bool):
    """Directed dyadic bound of num/den."""
    x = num / den
    p, q = x.numerator, x.denominator
    if q == 1:
        return (p, 0)
    s = max(0, prec + 2 - (abs(p).bit_length() - q.bit_length()))
    if down:
        return ((p << s) // q, -s)
    return (-((-(p << s)) // q), -s)


ZERO = DyInterval.exact(0)
ONE = DyInterval.exact(1)


# -- small vector helpers (lists of DyInterval) --------------------------

def iv_vec(values) -> list:
    """Exact conversion of a rational vector into interval form."""
    return [v if isinstance(v, DyInterval) else DyInterval.from_fraction(v)
            for v in values]


def vec_add(u, v):
    return [a + b for a, b in zip(u, v)]


def vec_sub(u, v):
    return [a - b for a, b in zip(u, v)]


def vec_scale(u, s):
    return [a * s for a in u]


def vec_dot(u, v) -> DyInterval:
    return DyInterval(K.iv_dot([a.t for a in u], [b.t for b in v], getbits()))


def vec_width(u) -> Fraction:
    return max((a.width for a in u), default=Fraction(0))


def vec_norm_hi(u) -> Fraction:
    """Upper bound on the Euclidean norm of any point in the box."""
    s = DyInterval.exact(0)
    for a in u:
        m = abs(a)
        s = s + m * m
    return s.sqrt().hi


def mat_ivs(rows) -> list:
    """Rational matrix (sequence of rows) to flat interval list."""
    flat = []
    for row in rows:
        flat.extend(iv_vec(row))
    return flat


def mat_vec(flat, vec, n, m):
    out = K.iv_matvec([a.t for a in flat], [b.t for b in vec], n, m, getbits())
    return [DyInterval(t) for t in out]


def iv_solve(a_flat, rhs_cols, n):
    """Certified solve of an n x n interval system against several RHS.

    ``a_flat`` is row-major; ``rhs_cols`` a list of RHS vectors.  Interval
    Gaussian elimination: the result encloses the exact solution of every
    point system within the input intervals.  Raises PrecisionError when
    no pivot interval excludes zero (precision too low for this matrix).
    """
    m = [list(a_flat[i * n:(i + 1) * n]) + [col[i] for col in rhs_cols]
         for i in range(n)]
    w = n + len(rhs_cols)
    for c in range(n):
        piv, best = None, Fraction(0)
        for r in range(c, n):
            e = m[r][c]
            if not e.contains_zero():
                score = min(abs(e.lo), abs(e.hi))
                if piv is None or score > best:
                    piv, best = r, score
        if piv is None:
            raise PrecisionError("no certified pivot in column %d" % c)
        m[c], m[piv] = m[piv], m[c]
        inv = m[c][c].recip()
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and not (m[r][c].t[0] == 0 and m[r][c].t[2] == 0):
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [[m[i][n + j] for i in range(n)] for j in range(len(rhs_cols))]
