"""Exact real-algebraic arithmetic and certified spectral data.

``AlgReal`` is a real algebraic number: a sympy expression kept exact,
with a lazily computed (minimal polynomial, isolating interval)
representation and a cache of certified ``DyInterval`` enclosures.
Comparisons follow the one-sided-safe rule: refine enclosures until they
separate, falling back to an exact zero test on the difference.

``eigen_structure`` computes the exact eigenvalue/Jordan data of a
rational matrix: characteristic polynomial factorisation over Q, root
isolation, and Jordan block sizes from exact ranks of p(A)^k.

``mat_exp_action`` / ``exp_and_phi`` produce certified enclosures of
e^(At) v and of the pair (e^(Ah), int_0^h e^(As) ds) by truncated series
with rigorous remainders and scaling-and-squaring.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy
from sympy import Poly, Rational

from . import qlinalg as ql
from .dyadic import DyInterval, PrecisionError, bits, getbits

_x = sympy.Symbol("x")


def _to_sympy_q(v) -> Rational:
    f = Fraction(v)
    return Rational(f.numerator, f.denominator)


def _to_fraction(r) -> Fraction:
    return Fraction(int(r.p), int(r.q))


class AlgReal:
    """A real algebraic number with certified enclosures."""

    __slots__ = ("expr", "_minpoly", "_enc")
    __hash__ = None  # identity-free: compare through alg_compare

    def __init__(self, expr):
        if isinstance(expr, AlgReal):
            expr = expr.expr
        elif isinstance(expr, (int, Fraction)):
            expr = _to_sympy_q(expr)
        self.expr = sympy.sympify(expr)
        self._minpoly = None
        self._enc = {}

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_root(cls, coeffs, lo, hi) -> "AlgReal":
        """Root of an integer polynomial isolated by the open interval (lo, hi).

        ``coeffs`` are low-degree-first integers; the interval must
        isolate exactly one real root.
        """
        lo, hi = Fraction(lo), Fraction(hi)
        p = Poly(list(reversed([int(c) for c in coeffs])), _x)
        if p.degree() < 1:
            raise ValueError("constant polynomial has no roots")
        if p.degree() == 1:
            a, b = p.all_coeffs()
            val = Fraction(-int(b), int(a))
            if not (lo < val < hi):
                raise ValueError("isolator does not contain the root")
            return cls(_to_sympy_q(val))
        slo, shi = _to_sympy_q(lo), _to_sympy_q(hi)
        if p.eval(slo) == 0 or p.eval(shi) == 0:
            raise ValueError("isolator endpoint is a root")
        inside = p.count_roots(slo, shi)
        if inside != 1:
            raise ValueError("interval isolates %d roots, expected 1" % inside)
        idx = p.count_roots(None, slo)
        return cls(sympy.CRootOf(p, idx))

    # -- exact structure --------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.expr.is_Rational

    def to_fraction(self) -> Fraction:
        if not self.expr.is_Rational:
            raise ValueError("not a rational value: %s" % self.expr)
        return _to_fraction(self.expr)

    def minpoly(self) -> Poly:
        if self._minpoly is None:
            if self.expr.is_Rational:
                f = _to_fraction(self.expr)
                self._minpoly = Poly([f.denominator, -f.numerator], _x)
            else:
                self._minpoly = Poly(
                    sympy.minimal_polynomial(self.expr, _x), _x
                )
        return self._minpoly

    def minpoly_coeffs(self) -> tuple:
        return tuple(int(c) for c in reversed(self.minpoly().all_coeffs()))

    def isolator(self) -> tuple:
        """A rational interval containing this root of minpoly() and no other."""
        p = self.minpoly()
        prec = 32
        while True:
            e = self.enclosure(prec)
            lo, hi = e.lo - e.width - Fraction(1, 2) ** prec, e.hi + e.width + Fraction(1, 2) ** prec
            if (
                p.eval(_to_sympy_q(lo)) != 0
                and p.eval(_to_sympy_q(hi)) != 0
                and p.count_roots(_to_sympy_q(lo), _to_sympy_q(hi)) == 1
            ):
                return (lo, hi)
            prec *= 2
            if prec > 1 << 16:
                raise PrecisionError("could not isolate root of %s" % p)

    # -- certified enclosure ----------------------------------------------

    def enclosure(self, prec: int | None = None) -> DyInterval:
        prec = prec or getbits()
        got = self._enc.get(prec)
        if got is None:
            with bits(prec):
                got = _enclose(self.expr, prec)
            self._enc[prec] = got
        return got

    # -- arithmetic (exact, sympy-backed) ---------------------------------

    def _bin(self, other, fn):
        o = other if isinstance(other, AlgReal) else AlgReal(other)
        return AlgReal(fn(self.expr, o.expr))

    def __add__(self, other):
        return self._bin(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._bin(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._bin(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._bin(other, lambda a, b: b / a)

    def __neg__(self):
        return AlgReal(-self.expr)

    def __eq__(self, other):
        if not isinstance(other, (AlgReal, int, Fraction)):
            return NotImplemented
        return alg_compare(self, other if isinstance(other, AlgReal) else AlgReal(other)) == 0

    def __lt__(self, other):
        return alg_compare(self, AlgReal(other)) < 0

    def __le__(self, other):
        return alg_compare(self, AlgReal(other)) <= 0

    def __gt__(self, other):
        return alg_compare(self, AlgReal(other)) > 0

    def __ge__(self, other):
        return alg_compare(self, AlgReal(other)) >= 0

    def sign(self) -> int:
        return alg_compare(self, AlgReal(0))

    def __repr__(self):
        return "AlgReal(%s)" % self.expr

    def __float__(self):
        return float(self.enclosure(64).mid)


def _enclose(expr, prec: int) -> DyInterval:
    """Certified interval for a real algebraic sympy expression."""
    if expr.is_Rational:
        return DyInterval.from_fraction(_to_fraction(expr), prec)
    if expr.is_Add:
        acc = DyInterval.exact(0)
        for a in expr.args:
            acc = acc + _enclose(a, prec)
        return acc
    if expr.is_Mul:
        acc = DyInterval.exact(1)
        for a in expr.args:
            acc = acc * _enclose(a, prec)
        return acc
    if expr.is_Pow:
        base, ex = expr.args
        if ex.is_Integer:
            k = int(ex)
            b = _enclose(base, prec)
            return b ** k if k >= 0 else (b ** (-k)).recip()
        if ex.is_Rational:
            b = _enclose(base, prec)
            p, q = int(ex.p), int(ex.q)
            if q == 2 and p == 1:
                return b.sqrt()
            if b.t[0] <= 0:
                raise PrecisionError("fractional power of non-positive enclosure")
            r = (b.log() * DyInterval.from_fraction(Fraction(p, q), prec)).exp()
            return r
    if isinstance(expr, sympy.CRootOf):
        tol = Rational(1, 2) ** (prec + 2)
        approx = expr.eval_rational(dx=tol, dy=tol)
        if expr.is_real:
            c = _to_fraction(approx)
            return DyInterval.from_endpoints(c - _to_fraction(tol), c + _to_fraction(tol), prec)
        raise PrecisionError("complex CRootOf inside a real expression")
    if isinstance(expr, (sympy.re, sympy.im)):
        r = expr.args[0]
        if isinstance(r, sympy.CRootOf):
            tol = Rational(1, 2) ** (prec + 2)
            approx = expr.args[0].eval_rational(dx=tol, dy=tol)
            part = sympy.re(approx) if isinstance(expr, sympy.re) else sympy.im(approx)
            c = _to_fraction(sympy.Rational(part))
            return DyInterval.from_endpoints(c - _to_fraction(tol), c + _to_fraction(tol), prec)
    raise PrecisionError("cannot enclose expression: %s" % expr)


def alg_compare(x: AlgReal, y: AlgReal) -> int:
    """Exact three-way comparison of algebraic reals: -1, 0 or 1."""
    d = x.expr - y.expr
    if d.is_Rational:
        f = _to_fraction(d)
        return (f > 0) - (f < 0)
    diff = AlgReal(d)
    prec = 64
    while prec <= 512:
        e = diff.enclosure(prec)
        s = e.sign()
        if s:
            return s
        prec *= 2
    # Interval refinement stalled: decide zero exactly via the minimal
    # polynomial, then keep refining (nonzero values must separate).
    mp = diff.minpoly()
    if mp.degree() == 1 and mp.eval(0) == 0:
        return 0
    while True:
        e = diff.enclosure(prec)
        s = e.sign()
        if s:
            return s
        prec *= 2
        if prec > 1 << 20:
            raise PrecisionError("comparison failed to converge")


def alg_max(values):
    best = None
    for v in values:
        if best is None or alg_compare(v, best) > 0:
            best = v
    return best


def alg_ceil(x: AlgReal) -> int:
    """Smallest integer >= x."""
    e = x.enclosure(64)
    k = -(-e.hi.numerator // e.hi.denominator)  # ceil of upper bound
    while alg_compare(x, AlgReal(k - 1)) <= 0:
        k -= 1
    return k


# -- spectral structure --------------------------------------------------


@dataclass
class Eigenvalue:
    re: AlgReal
    im: AlgReal                # 0 for real eigenvalues
    multiplicity: int          # algebraic multiplicity of this root
    max_block: int             # largest Jordan block size
    factor: tuple              # integer coeffs (low first) of its minimal poly

    @property
    def is_real(self) -> bool:
        return self.im.expr.is_zero


@dataclass
class SpectralStructure:
    n: int
    eigenvalues: list
    factors: list              # (coeffs low-first ints, multiplicity)
    stable: bool
    weakly_antistable: bool
    mixed: bool
    real_spectrum: bool
    abscissa: AlgReal          # max real part

    @property
    def max_block_overall(self) -> int:
        return max(e.max_block for e in self.eigenvalues)


def eigen_structure(a_rows) -> SpectralStructure:
    """Exact spectral and Jordan data of a rational square matrix."""
    a = ql.mat(a_rows)
    n = len(a)
    cp = ql.charpoly(a)  # low-first Fractions, monic
    den = 1
    for c in cp:
        den = den * c.denominator // sympy.igcd(den, c.denominator)
    p = Poly([int(c * den) for c in reversed(cp)], _x)
    _, factors = p.factor_list()
    eigs = []
    fac_list = []
    for q, mult in sorted(factors, key=lambda fm: sympy.default_sort_key(fm[0])):
        qz = Poly(q, _x)
        coeffs = tuple(int(c) for c in reversed(qz.all_coeffs()))
        fac_list.append((coeffs, int(mult)))
        sizes = _block_sizes(a, qz, int(mult), n)
        for root in qz.all_roots():
            if root.is_real:
                re, im = AlgReal(root), AlgReal(0)
            else:
                re, im = AlgReal(sympy.re(root)), AlgReal(sympy.im(root))
            eigs.append(Eigenvalue(re, im, int(mult), max(sizes), coeffs))
    re_signs = []
    for e in eigs:
        if e.is_real:
            re_signs.append(e.re.sign())
        else:
            re_signs.append(_root_re_sign(e))
    stable = all(s < 0 for s in re_signs)
    weak_anti = all(s >= 0 for s in re_signs)
    real_spec = all(e.is_real for e in eigs)
    absc = alg_max([e.re for e in eigs])
    return SpectralStructure(
        n=n,
        eigenvalues=eigs,
        factors=fac_list,
        stable=stable,
        weakly_antistable=weak_anti,
        mixed=not stable and not weak_anti,
        real_spectrum=real_spec,
        abscissa=absc,
    )


def _root_re_sign(e: Eigenvalue) -> int:
    for prec in (64, 128, 256):
        enc = e.re.enclosure(prec)
        s = enc.sign()
        if s:
            return s
    return e.re.sign()


def _block_sizes(a, q: Poly, mult: int, n: int) -> list:
    """Jordan block sizes for each root of the irreducible factor q.

    Uses exact rational ranks: rank(q(A)^k) = n - deg(q) * sum_j min(k, s_j).
    """
    d = q.degree()
    coeffs = [Fraction(int(c)) for c in reversed(q.all_coeffs())]
    qa = ql.apply_poly(a, coeffs)
    nullities = [0]
    power = ql.identity(n)
    for k in range(1, mult + 1):
        power = ql.mat_mul(power, qa)
        nullity = n - ql.rank(power)
        assert nullity % d == 0
        nullities.append(nullity // d)
        if nullities[-1] == mult:
            break
    # blocks of size >= k: nullities[k] - nullities[k-1]
    sizes = []
    for k in range(1, len(nullities)):
        count_ge_k = nullities[k] - nullities[k - 1]
        while len(sizes) < count_ge_k:
            sizes.append(0)
        for i in range(count_ge_k):
            sizes[i] += 1
    total = sum(sizes)
    assert total == mult, (sizes, mult)
    return sizes if sizes else [0]


def spectral_structure_of_algebraic_diagonal(diag_entries) -> SpectralStructure:
    """Spectral data of diag(d_1, ..., d_n) with AlgReal entries."""
    entries = [d if isinstance(d, AlgReal) else AlgReal(d) for d in diag_entries]
    n = len(entries)
    groups = []
    for d in entries:
        for g in groups:
            if alg_compare(g[0], d) == 0:
                g[1] += 1
                break
        else:
            groups.append([d, 1])
    eigs = [
        Eigenvalue(d, AlgReal(0), m, 1, tuple(int(c) for c in AlgReal(d).minpoly_coeffs()))
        for d, m in groups
    ]
    signs = [e.re.sign() for e in eigs]
    return SpectralStructure(
        n=n,
        eigenvalues=eigs,
        factors=[(e.factor, e.multiplicity) for e in eigs],
        stable=all(s < 0 for s in signs),
        weakly_antistable=all(s >= 0 for s in signs),
        mixed=not all(s < 0 for s in signs) and not all(s >= 0 for s in signs),
        real_spectrum=True,
        abscissa=alg_max([e.re for e in eigs]),
    )


# -- certified matrix exponential ----------------------------------------


def _inf_norm_hi(flat, n: int) -> Fraction:
    best = Fraction(0)
    for i in range(n):
        s = Fraction(0)
        for j in range(n):
            e = flat[i * n + j]
            s += max(abs(e.lo), abs(e.hi))
        best = max(best, s)
    return best


def _mat_iv_mul(a, b, n, prec):
    from . import _kernel as K

    at = [x.t for x in a]
    bt = [x.t for x in b]
    out = []
    for i in range(n):
        for j in range(n):
            acc = (0, 0, 0, 0)
            for k in range(n):
                acc = K.iv_add(acc, K.iv_mul(at[i * n + k], bt[k * n + j], prec), prec)
            out.append(acc)
    return [DyInterval(t) for t in out]


def _series_pair(x_flat, n: int, prec: int):
    """Enclosures of (exp(X), phi1(X) = sum X^k/(k+1)!) for ||X||_inf <= 1/2."""
    norm = _inf_norm_hi(x_flat, n)
    if norm > Fraction(1, 2):
        raise ValueError("series step requires ||X|| <= 1/2")
    terms = 4
    fact = 1
    while True:
        # remainder of exp tail: ||X||^(N+1)/(N+1)! * 1/(1 - ||X||/(N+2)) <= 2 (1/2)^(N+1)/(N+1)!
        fact = 1
        for k in range(2, terms + 2):
            fact *= k
        rem = 2 * Fraction(1, 2) ** (terms + 1) / fact
        if rem <= Fraction(1, 2) ** (prec + 4):
            break
        terms += 2
    ident = [DyInterval.exact(int(i == j)) for i in range(n) for j in range(n)]
    expo = list(ident)
    phi = list(ident)
    power = list(ident)
    kfact = 1
    for k in range(1, terms + 1):
        power = _mat_iv_mul(power, x_flat, n, prec)
        kfact *= k
        inv_k = DyInterval.from_fraction(Fraction(1, kfact), prec)
        inv_k1 = DyInterval.from_fraction(Fraction(1, kfact * (k + 1)), prec)
        expo = [e + p * inv_k for e, p in zip(expo, power)]
        phi = [f + p * inv_k1 for f, p in zip(phi, power)]
    ball = DyInterval.ball(0, rem)
    expo = [e + ball for e in expo]
    phi = [f + ball for f in phi]
    return expo, phi


def exp_and_phi(a_rows, h, prec: int | None = None):
    """Certified (e^(Ah), int_0^h e^(As) ds) for rational A and h > 0.

    Valid for singular A as well: the integral factor is computed from its
    own series and the doubling identities E(2t) = E(t)^2,
    Phi(2t) = (I + E(t)) Phi(t).
    """
    prec = prec or getbits()
    a = ql.mat(a_rows)
    n = len(a)
    h = Fraction(h)
    if h < 0:
        raise ValueError("negative step")
    norm_a = _inf_norm_hi([DyInterval.from_fraction(x, prec) for row in a for x in row], n)
    s = 0
    while norm_a * h / (1 << s) > Fraction(1, 2):
        s += 1
    with bits(prec):
        h0 = DyInterval.from_fraction(h / (1 << s), prec)
        x_flat = [DyInterval.from_fraction(x, prec) * h0 for row in a for x in row]
        expo, phi = _series_pair(x_flat, n, prec)
        phi = [p * h0 for p in phi]
        ident = [DyInterval.exact(int(i == j)) for i in range(n) for j in range(n)]
        for _ in range(s):
            phi = _mat_iv_mul([i + e for i, e in zip(ident, expo)], phi, n, prec)
            expo = _mat_iv_mul(expo, expo, n, prec)
    return expo, phi


def _is_nilpotent(a) -> int | None:
    """Return the nilpotency index if A^k = 0 for some k <= n, else None."""
    n = len(a)
    power = a
    for k in range(1, n + 1):
        if all(x == 0 for row in power for x in row):
            return k
        power = ql.mat_mul(power, a)
    if all(x == 0 for row in power for x in row):
        return n
    return None


def mat_exp_action(a_rows, t, v, tol) -> list:
    """Certified enclosure of e^(At) v for every t in the input interval.

    ``t`` may be a DyInterval or an exact rational; ``v`` a vector of
    DyInterval or rationals.  Width <= tol when t and v are points.
    Raises PrecisionError if tol is unreachable within the bit budget.
    """
    a = ql.mat(a_rows)
    n = len(a)
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_iv = t if isinstance(t, DyInterval) else DyInterval.from_fraction(Fraction(t))
    if t_iv.lo < 0:
        raise ValueError("negative time")
    vv = [x if isinstance(x, DyInterval) else DyInterval.from_fraction(Fraction(x)) for x in v]

    k_nil = _is_nilpotent(a)
    if k_nil is not None:
        prec = max(getbits(), tol_bits(tol) + 32)
        with bits(prec):
            acc = list(vv)
            term = list(vv)
            tk = DyInterval.exact(1)
            for k in range(1, k_nil):
                term = [sum_iv(ql_row_dot(a, term, i)) for i in range(n)]
                tk = tk * t_iv
                coef = tk * DyInterval.from_fraction(Fraction(1, _fact(k)), prec)
                acc = [x + w * coef for x, w in zip(acc, term)]
            return acc

    prec = max(getbits(), tol_bits(tol) + 16)
    for _ in range(8):
        with bits(prec):
            mid = t_iv.mid
            radius = t_iv.rad
            expo, _ = exp_and_phi(a, mid, prec)
            if radius > 0:
                norm_a = _inf_norm_hi(
                    [DyInterval.from_fraction(x, prec) for row in a for x in row], n
                )
                # ||e^(A d) - I|| <= e^(||A|| r) - 1 for |d| <= r
                grow = (DyInterval.from_fraction(norm_a * radius, prec)).exp() - 1
                ball = DyInterval((-grow.t[2], grow.t[3], grow.t[2], grow.t[3]))
                expo = [e + ball for e in expo]
            out = []
            for i in range(n):
                acc = DyInterval.exact(0)
                for j in range(n):
                    acc = acc + expo[i * n + j] * vv[j]
                out.append(acc)
        if max(o.width for o in out) <= tol or radius > 0:
            return out
        prec *= 2
    raise PrecisionError("mat_exp_action: tol %s unreachable" % tol)


def tol_bits(tol: Fraction) -> int:
    t = Fraction(tol)
    b = 0
    while Fraction(1, 2) ** b > t and b < 1 << 14:
        b += 1
    return b


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def sum_iv(vals) -> DyInterval:
    acc = DyInterval.exact(0)
    for v in vals:
        acc = acc + v
    return acc


def ql_row_dot(a, term, i) -> list:
    return [DyInterval.from_fraction(a[i][j]) * term[j] for j in range(len(term))]
