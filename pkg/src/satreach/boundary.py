"""Certified support points of the reachable set.

For a stable controllable single-input pair (A, b) and a direction c,
the boundary point in direction c is

    beta_c = integral_0^inf e^(At) b sgn(c^T e^(At) b) dt,

computed here as a certified enclosure: pick a truncation horizon T from
a rigorous decay bound so the discarded tail is below tol/2, isolate the
sign changes of f(t) = c^T e^(At) b on [0, T], and integrate piecewise
with the exact exponential-polynomial antiderivative.  Directions along
which the sign never changes yield the exact point +-(-A^(-1) b); this
is detected symbolically where the spectrum allows it.

The closed planar form for complex eigenvalue pairs is re-derived from
the matrix convention J = [[lam, th], [-th, lam]] (which acts on x + iy
as multiplication by lam - i*th); evaluation reduces to the exact pair
u = c^T b, v = c1 b2 - c2 b1 so no inverse trigonometry enters the sign
bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import sympy

from . import qlinalg as ql
from .algnum import AlgReal, SpectralStructure, alg_compare, eigen_structure, tol_bits
from .dyadic import DyInterval, PrecisionError, bits, getbits
from .exppoly import (
    ExpPoly,
    FlowCurve,
    IdenticallyZeroError,
    NeedsMoreBudget,
    SignPattern,
    flow_curve,
    form_fc,
    isolate_sign_changes,
    zero_count_bound,
)


class NotStableError(ValueError):
    pass


class NotControllableError(ValueError):
    pass


@dataclass
class TailBound:
    """Certified decay bound ||e^(At) b|| <= d * e^(alpha t) for t >= 0."""

    d: Fraction
    alpha: Fraction

    def tail_integral(self, t_from: Fraction) -> Fraction:
        """Upper bound on integral_T^inf ||e^(At) b|| dt."""
        with bits(96):
            e = (DyInterval.from_fraction(self.alpha * t_from)).exp()
            val = DyInterval.from_fraction(self.d) * e / DyInterval.from_fraction(-self.alpha)
        return val.hi

    def horizon_for(self, tol: Fraction) -> Fraction:
        """Smallest convenient T with the tail integral below tol."""
        tol = Fraction(tol)
        with bits(96):
            u = DyInterval.from_fraction(self.d / (-self.alpha) / tol)
            if u.hi <= 1:
                return Fraction(1)
            t = (u.log() / DyInterval.from_fraction(-self.alpha)).hi
        t = max(Fraction(1), t)
        # round up to a dyadic with a few fractional bits
        num = -((-t.numerator * 16) // t.denominator)
        return Fraction(num, 16)


@dataclass
class SupportPoint:
    direction: tuple
    enclosure: list                  # DyInterval box containing beta_c
    pattern: SignPattern | None
    horizon: object                  # "inf" or the bound tau
    truncation: Fraction | None
    tail_radius: Fraction
    exact_point: tuple | None = None # exact value for constant-sign directions

    @property
    def width(self) -> Fraction:
        return max(e.width for e in self.enclosure)

    def midpoint(self) -> tuple:
        return tuple(e.mid for e in self.enclosure)

    def upper_along(self, c) -> Fraction:
        """Upper bound of c^T x over the enclosure box."""
        acc = DyInterval.exact(0)
        for ci, e in zip(c, self.enclosure):
            acc = acc + e * DyInterval.from_fraction(Fraction(ci))
        return acc.hi

    def negated(self) -> "SupportPoint":
        return SupportPoint(
            tuple(-Fraction(x) for x in self.direction),
            [-e for e in self.enclosure],
            self.pattern,
            self.horizon,
            self.truncation,
            self.tail_radius,
            None if self.exact_point is None else tuple(-x for x in self.exact_point),
        )


def tail_bound(a_rows, b_vec, spectral: SpectralStructure | None = None,
               curve: FlowCurve | None = None) -> TailBound:
    """Certified (D, alpha) with ||e^(At) b|| <= D e^(alpha t), alpha < 0.

    When every eigenvalue line is diagonalisable (degree-0 coefficient
    polynomials) alpha may equal the spectral abscissa itself; otherwise
    a margin above the abscissa absorbs the polynomial factors.
    """
    spec = spectral or eigen_structure(a_rows)
    if not spec.stable:
        raise NotStableError("tail bound requires a stable matrix")
    fc = curve or flow_curve(a_rows, b_vec, spec)
    prec = max(getbits(), 96)
    for _ in range(5):
        terms = fc.coeffs(prec)
        max_deg = max(len(tc.pc) - 1 for tc in terms)
        absc = spec.abscissa
        if max_deg == 0:
            alpha = absc.to_fraction() if absc.is_rational else absc.enclosure(prec).hi
        else:
            hi = absc.enclosure(prec).hi
            k = 0
            while hi >= 0:
                k += 1
                hi = absc.enclosure(prec * (1 << k)).hi
                if k > 8:
                    raise NotStableError("cannot certify negative abscissa")
            alpha = hi / 2
        if alpha >= 0:
            prec *= 2
            continue
        try:
            with bits(prec):
                e_iv = DyInterval.exact(1).exp()
                total = DyInterval.exact(0)
                for tc in terms:
                    a_hi = tc.line.re.enclosure(prec).hi
                    delta = alpha - a_hi
                    for r in range(len(tc.pc)):
                        mag = DyInterval.exact(0)
                        for row in (tc.pc[r], tc.ps[r]):
                            for x in row:
                                mag = mag + abs(x)
                        if mag.t[2] == 0:
                            continue
                        if r == 0:
                            # e^(a t) <= e^(alpha t) holds with the TRUE a
                            sup = DyInterval.exact(1)
                        else:
                            if delta <= 0:
                                raise PrecisionError(
                                    "polynomial factor at the dominant rate")
                            sup = (DyInterval.exact(r) /
                                   (e_iv * DyInterval.from_fraction(delta))) ** r
                        total = total + mag * sup
                d = total.hi
            return TailBound(d=max(d, Fraction(1, 1 << 40)), alpha=alpha)
        except PrecisionError:
            prec *= 2
    raise PrecisionError("tail bound did not converge")


def _check_pair(a_rows, b_vec):
    a = ql.mat(a_rows)
    b = ql.vec(b_vec)
    if ql.rank(ql.krylov(a, b)) != len(a):
        raise NotControllableError("(A, b) is not controllable")
    return a, b


def _alg_diag_entries(a_rows):
    """Diagonal entries when A has algebraic entries; None for rational A."""
    if not any(isinstance(x, AlgReal) for row in a_rows for x in row):
        return None
    n = len(a_rows)
    for i in range(n):
        for j in range(n):
            if i != j:
                x = a_rows[i][j]
                zero = x.sign() == 0 if isinstance(x, AlgReal) else x == 0
                if not zero:
                    raise ValueError(
                        "algebraic matrices are supported only in diagonal form")
    return [a_rows[i][i] if isinstance(a_rows[i][i], AlgReal)
            else AlgReal(Fraction(a_rows[i][i])) for i in range(n)]


def _diag_setup(entries, b_vec, c_vec):
    """(spec, f, curve, weights) for a diagonal algebraic system."""
    from .algnum import spectral_structure_of_algebraic_diagonal
    from .exppoly import _group_diag, flow_curve_diag, form_fc_diag

    b = [Fraction(x) for x in b_vec]
    c = [Fraction(x) for x in c_vec] if c_vec is not None else None
    vals, groups = _group_diag(entries)
    if len(vals) != len(entries) or any(x == 0 for x in b):
        raise NotControllableError("(A, b) is not controllable")
    spec = spectral_structure_of_algebraic_diagonal(entries)
    curve = flow_curve_diag(entries, b)
    f = form_fc_diag(entries, b, c) if c is not None else None
    weights = None
    if c is not None:
        weights = [sum((c[i] * b[i] for i in g), Fraction(0)) for g in groups]
    return spec, f, curve, vals, weights


def _exact_crossing_count_diag(weights, vals):
    """Exact sign-change count on (0, inf) for sum w_g e^(mu_g t)."""
    active = [(w, v) for w, v in zip(weights, vals) if w != 0]
    if len(active) <= 1:
        return 0
    if len(active) == 2:
        (w1, m1), (w2, m2) = active
        if (w1 > 0) == (w2 > 0):
            return 0
        rho = -Fraction(w1) / Fraction(w2)   # > 0 here
        # zero at t* = ln(rho) / (m2 - m1); crossing iff t* > 0
        if rho == 1:
            return 0
        m_cmp = alg_compare(m2, m1)
        if m_cmp == 0:
            return 0
        return 1 if ((rho > 1) == (m_cmp > 0)) else 0
    return None


def _exact_crossing_count(a, b, c, spec: SpectralStructure):
    """Exact number of sign changes of f on (0, inf), or None if unknown.

    Covers diagonalisable rational spectra (substitution x = e^(-t/L)
    reduces f to a polynomial on (0,1)) and a single rational eigenvalue
    (f = e^(lam t) Q(t)); in both cases sign changes are the open-interval
    roots of odd multiplicity, counted exactly.
    """
    x = sympy.Symbol("x")
    if not spec.real_spectrum:
        return None
    if any(not e.re.is_rational for e in spec.eigenvalues):
        return None
    if len(spec.eigenvalues) == 1 and spec.eigenvalues[0].multiplicity >= 1:
        lam = spec.eigenvalues[0].re.to_fraction()
        s = spec.eigenvalues[0].max_block
        # f e^(-lam t) = Q(t); solve the triangular moment system exactly
        moments = []
        cur = b
        for _ in range(s):
            moments.append(ql.vec_dot_q(c, cur))
            cur = ql.mat_vec_q(a, cur)
        q = [Fraction(0)] * s
        for k in range(s):
            acc = moments[k]
            for r in range(k):
                acc -= math.comb(k, r) * math.factorial(r) * lam ** (k - r) * q[r]
            q[k] = acc / math.factorial(k)
        poly = sympy.Poly([sympy.Rational(x_.numerator, x_.denominator)
                           for x_ in reversed(q)], x)
        if poly.is_zero:
            return None
        return _odd_roots_in(poly, 0, None)
    if all(e.max_block == 1 for e in spec.eigenvalues):
        lams = sorted({e.re.to_fraction() for e in spec.eigenvalues})
        lcm = 1
        for l in lams:
            lcm = lcm * l.denominator // math.gcd(lcm, l.denominator)
        weights = {}
        # Lagrange projections give the exact coefficient of e^(lam t)
        for lam in lams:
            proj = ql.identity(len(a))
            for mu in lams:
                if mu == lam:
                    continue
                shift = tuple(
                    tuple((a[i][j] - (mu if i == j else 0)) / (lam - mu)
                          for j in range(len(a)))
                    for i in range(len(a))
                )
                proj = ql.mat_mul(proj, shift)
            weights[lam] = ql.vec_dot_q(c, ql.mat_vec_q(proj, b))
        # f(t) = sum w_lam e^(lam t); with z = e^(t/lcm) in (1, inf):
        # f = sum w_lam z^(lam * lcm), exponents integers (can be negative)
        exps = {lam: int(lam * lcm) for lam in lams}
        emin = min(exps.values())
        coeffs = {}
        for lam in lams:
            coeffs[exps[lam] - emin] = weights[lam]
        deg = max(coeffs)
        plist = [coeffs.get(k, Fraction(0)) for k in range(deg + 1)]
        poly = sympy.Poly([sympy.Rational(v.numerator, v.denominator)
                           for v in reversed(plist)], x)
        if poly.is_zero:
            return None
        return _odd_roots_in(poly, 1, None)
    return None


def _odd_roots_in(poly, lo, hi):
    """Number of odd-multiplicity real roots in the open interval (lo, hi)."""
    from collections import Counter

    counts = Counter(sympy.real_roots(poly, multiple=True))
    total = 0
    for root, mult in counts.items():
        if mult % 2 == 0:
            continue
        if lo is not None and not bool(root > lo):
            continue
        if hi is not None and not bool(root < hi):
            continue
        total += 1
    return total


def _neg_a_inv_b(a, b):
    return tuple(-x for x in ql.mat_vec_q(ql.inverse(a), b))


def _piece_integral(curve: FlowCurve, pattern: SignPattern, end: DyInterval,
                    prec: int) -> list:
    """eps0 [2 sum (-1)^(i-1) F(t_i) - F(0) + (-1)^k F(end)] as a box."""
    with bits(prec):
        f0 = curve.antider_eval(DyInterval.exact(0), prec)
        acc = [-x for x in f0]
        sign = 2
        for enc in pattern.crossings:
            ft = curve.antider_eval(enc, prec)
            acc = [x + y * sign for x, y in zip(acc, ft)]
            sign = -sign
        fe = curve.antider_eval(end, prec)
        k = len(pattern.crossings)
        last = 1 if k % 2 == 0 else -1
        acc = [x + y * last for x, y in zip(acc, fe)]
        if pattern.initial_sign < 0:
            acc = [-x for x in acc]
    return acc


def support_point(a_rows, b_vec, c_vec, tol, spectral: SpectralStructure | None = None,
                  depth_budget: int = 60) -> SupportPoint:
    """Certified enclosure of beta_c for a stable controllable pair.

    Constant-sign directions are detected exactly where the spectrum
    allows and return the exact rational point +-(-A^(-1) b); otherwise
    the enclosure has width <= tol.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = ql.vec(c_vec)
    if all(x == 0 for x in c):
        raise ValueError("direction must be nonzero")
    diag = _alg_diag_entries(a_rows)
    if diag is not None:
        spec, f, curve, vals, weights = _diag_setup(diag, b_vec, c)
        if not spec.stable:
            raise NotStableError("infinite-horizon support points need a stable A")
        exact_n = _exact_crossing_count_diag(weights, vals)
        a = b = None
    else:
        a, b = _check_pair(a_rows, b_vec)
        spec = spectral or eigen_structure(a)
        if not spec.stable:
            raise NotStableError("infinite-horizon support points need a stable A")
        f = form_fc(a, b, c, spec)
        curve = flow_curve(a, b, spec)
        exact_n = _exact_crossing_count(a, b, c, spec)
    if exact_n == 0:
        sgn = f.initial_sign_exact()
        if diag is not None:
            pt = tuple(-AlgReal(Fraction(x)) / v for x, v in zip(b_vec, vals))
        else:
            pt = _neg_a_inv_b(a, b)
        if sgn < 0:
            pt = tuple(-x for x in pt)
        prec = max(getbits(), tol_bits(tol) + 16)
        enc = [x.enclosure(prec) if isinstance(x, AlgReal)
               else DyInterval.from_endpoints(x, x) for x in pt]
        return SupportPoint(tuple(c), enc,
                            SignPattern([], sgn, (Fraction(0), Fraction(0))),
                            "inf", None, Fraction(0), pt)

    tb = tail_bound(a_rows, b_vec, spec, curve)
    t_hor = tb.horizon_for(tol / 4)
    prec = max(getbits(), tol_bits(tol) + 32)
    for attempt in range(8):
        try:
            nmax = zero_count_bound(f, t_hor) + 1
            cw = tol / (16 * max(tb.d, Fraction(1)) * nmax)
            pattern = isolate_sign_changes(f, t_hor, depth_budget,
                                           crossing_width=cw, prec=prec)
        except NeedsMoreBudget as nb:
            if attempt >= 3:
                raise
            # a zero may sit at the horizon: nudge T and retry harder
            t_hor = t_hor * Fraction(9, 8)
            prec *= 2
            continue
        assert len(pattern.crossings) <= zero_count_bound(f, t_hor)
        box = _piece_integral(curve, pattern, DyInterval.from_fraction(t_hor), prec)
        tail = tb.tail_integral(t_hor)
        box = [x.widen(tail) for x in box]
        if max(x.width for x in box) <= tol:
            return SupportPoint(tuple(c), box, pattern, "inf", t_hor, tail)
        prec *= 2
    raise PrecisionError("support_point: tolerance %s unreachable" % tol)


def support_point_bounded(a_rows, b_vec, c_vec, tau, tol,
                          spectral: SpectralStructure | None = None,
                          depth_budget: int = 60) -> SupportPoint:
    """Certified bounded-horizon support point (any spectrum).

    beta_c = integral_0^tau e^(At) b sgn(c^T e^(At) b) dt; sign changes
    are isolated on [0, tau] with the Tijdeman-bounded count and the
    integral is assembled from the exact antiderivative; no tail term.
    """
    tol = Fraction(tol)
    c = ql.vec(c_vec)
    if all(x == 0 for x in c):
        raise ValueError("direction must be nonzero")
    tau_alg = tau if isinstance(tau, AlgReal) else AlgReal(Fraction(tau))
    if tau_alg.sign() < 0:
        raise ValueError("tau must be >= 0")
    n = len(a_rows)
    if tau_alg.sign() == 0:
        zero = DyInterval.exact(0)
        return SupportPoint(tuple(c), [zero] * n, None, Fraction(0),
                            None, Fraction(0), tuple(Fraction(0) for _ in range(n)))
    diag = _alg_diag_entries(a_rows)
    if diag is not None:
        spec, f, curve, _, _ = _diag_setup(diag, b_vec, c)
    else:
        a, b = _check_pair(a_rows, b_vec)
        spec = spectral or eigen_structure(a)
        f = form_fc(a, b, c, spec)
        curve = flow_curve(a, b, spec)
    prec = max(getbits(), tol_bits(tol) + 32)
    for attempt in range(8):
        tau_enc = tau_alg.enclosure(prec)
        t_cover = tau_enc.hi
        try:
            nmax = zero_count_bound(f, t_cover) + 1
            bnd = _norm_bound_on(curve, t_cover, prec)
            cw = tol / (8 * max(bnd, Fraction(1)) * nmax)
            pattern = isolate_sign_changes(f, t_cover, depth_budget,
                                           crossing_width=cw, prec=prec)
        except NeedsMoreBudget:
            if attempt >= 3:
                raise
            prec *= 2
            continue
        inner = [enc for enc in pattern.crossings if enc.hi < tau_enc.lo]
        straddle = [enc for enc in pattern.crossings if not enc.hi < tau_enc.lo]
        pat = SignPattern(inner, pattern.initial_sign, (Fraction(0), t_cover))
        box = _piece_integral(curve, pat, tau_enc, prec)
        if straddle:
            # a crossing enclosure overlaps tau: the trailing sign may be
            # wrong on a slice no wider than the enclosure, bounded here
            slack = sum((enc.width for enc in straddle), Fraction(0))
            box = [x.widen(2 * bnd * slack) for x in box]
        if max(x.width for x in box) <= tol:
            return SupportPoint(tuple(c), box, pat, tau_alg, None, Fraction(0))
        prec *= 2
    raise PrecisionError("support_point_bounded: tolerance %s unreachable" % tol)


def _norm_bound_on(curve: FlowCurve, t_hi: Fraction, prec: int) -> Fraction:
    """Upper bound on sum_i |(e^(At) b)_i| over [0, t_hi]."""
    with bits(prec):
        box = curve.eval(DyInterval.from_endpoints(Fraction(0), t_hi), prec)
        acc = DyInterval.exact(0)
        for x in box:
            acc = acc + abs(x)
        return acc.hi


# -- planar complex closed form -------------------------------------------


@dataclass
class PlanarSpiralForm:
    """Spiral data for J = [[lam, th], [-th, lam]] with lam < 0, th != 0.

    beta / phi are the input/direction angles (certified enclosures);
    the exact pair (u, v) = (c^T b, c1 b2 - c2 b1) drives all sign
    decisions so the angles never enter a branch.
    """

    lam: AlgReal
    theta: AlgReal
    beta: DyInterval
    phi: DyInterval
    t_phi: DyInterval
    eps_phi: int
    u: Fraction
    v: Fraction
    b: tuple
    c: tuple
    flipped: bool            # second axis mirrored to make theta > 0


def planar_spiral_form(a_rows, b_vec, c_vec, prec: int | None = None) -> PlanarSpiralForm:
    """Build the spiral form; A must be exactly [[lam, th], [-th, lam]]."""
    prec = prec or getbits()
    a = ql.mat(a_rows)
    if len(a) != 2 or a[0][0] != a[1][1] or a[0][1] != -a[1][0]:
        raise ValueError("matrix is not in planar rotation form")
    lam, th = AlgReal(a[0][0]), AlgReal(a[0][1])
    if th.sign() == 0:
        raise ValueError("zero rotation rate")
    if lam.sign() >= 0:
        raise NotStableError("spiral form requires lam < 0")
    b = ql.vec(b_vec)
    c = ql.vec(c_vec)
    flipped = False
    if th.sign() < 0:
        # conjugate by diag(1, -1): J(-th) = D J(th) D
        th = -th
        b = (b[0], -b[1])
        c = (c[0], -c[1])
        flipped = True
    if b == (0, 0):
        raise ValueError("zero input column")
    if c == (0, 0):
        raise ValueError("zero direction")
    u = ql.vec_dot_q(c, b)
    v = c[0] * b[1] - c[1] * b[0]
    with bits(prec):
        beta = DyInterval.atan2(DyInterval.from_fraction(b[1]),
                                DyInterval.from_fraction(b[0]))
        phi = DyInterval.atan2(DyInterval.from_fraction(c[1]),
                               DyInterval.from_fraction(c[0]))
        if u == 0:
            t_phi = DyInterval.exact(0)
            eps = -1
        else:
            t_phi = _first_cos_zero(u, v, th, prec)
            eps = 1 if u > 0 else -1
    return PlanarSpiralForm(lam, th, beta, phi, t_phi, eps, u, v,
                            tuple(b), tuple(c), flipped)


def _first_cos_zero(u: Fraction, v: Fraction, th: AlgReal, prec: int) -> DyInterval:
    """First t > 0 with u cos(th t) + v sin(th t) = 0, for u != 0, th > 0.

    Zeros sit at t = (pi/2 - psi + k pi)/th with psi = atan2(-v, u); the
    first positive one lies strictly inside (0, pi/th) because u != 0.
    """
    attempt = prec
    for _ in range(6):
        with bits(attempt):
            th_iv = th.enclosure(attempt)
            pi = DyInterval.pi(attempt)
            psi = DyInterval.atan2(DyInterval.from_fraction(-v),
                                   DyInterval.from_fraction(u))
            period = pi / th_iv
            t = (pi.scale2(-1) - psi) / th_iv
            for _ in range(4):
                if t.sign() > 0 and (period - t).sign() > 0:
                    return t
                if t.t[2] <= 0:          # certified <= 0
                    t = t + period
                elif (t - period).t[0] >= 0:  # certified >= period
                    t = t - period
                else:
                    break
        attempt *= 2
    raise PrecisionError("could not localise the first cosine zero")


def planar_spiral_support(form: PlanarSpiralForm, tol) -> SupportPoint:
    """Closed-form support point for the unit-norm input of a spiral.

    Values are for b normalised to norm 1 (the caller rescales the
    reachable set by ||b||).  The alternating series over half-periods
    collapses to

        beta = eps * e^(i beta) / mu * (-1 + 2 e^(mu t1) / (1 - q)),
        mu = lam - i th,  q = e^(lam pi / th),

    where t1 is the first positive sign change and eps the sign of f on
    (0, t1); cross-checked against the generic integrator in the tests.
    """
    tol = Fraction(tol)
    prec = max(getbits(), tol_bits(tol) + 24)
    for _ in range(6):
        with bits(prec):
            lam = form.lam.enclosure(prec)
            th = form.theta.enclosure(prec)
            pi = DyInterval.pi(prec)
            period = pi / th
            if form.u == 0:
                # zero at t = 0: the series starts at the next zero, with
                # the sign of f just after 0, i.e. sgn(v) (th > 0)
                t1 = period
                eps = 1 if form.v > 0 else -1
            else:
                t1 = _first_cos_zero(form.u, form.v, form.theta, prec)
                eps = 1 if form.u > 0 else -1
            q = (lam * pi / th).exp()
            one_minus_q = DyInterval.exact(1) - q
            # complex helpers on (re, im) pairs
            exp_l = (lam * t1).exp()
            ang = th * t1
            e_re = exp_l * ang.cos()
            e_im = exp_l * -ang.sin()          # e^(mu t1), mu = lam - i th
            ratio = one_minus_q.recip()
            inner_re = DyInterval.exact(-1) + e_re.scale2(1) * ratio
            inner_im = e_im.scale2(1) * ratio
            den = (lam * lam + th * th).recip()
            mu_inv_re = lam * den              # 1/mu = conj(mu) / |mu|^2
            mu_inv_im = th * den
            val_re = mu_inv_re * inner_re - mu_inv_im * inner_im
            val_im = mu_inv_re * inner_im + mu_inv_im * inner_re
            # multiply by unit e^(i beta) = (b1 + i b2)/||b||
            nb = (DyInterval.from_fraction(form.b[0]) ** 2 +
                  DyInterval.from_fraction(form.b[1]) ** 2).sqrt().recip()
            b1 = DyInterval.from_fraction(form.b[0]) * nb
            b2 = DyInterval.from_fraction(form.b[1]) * nb
            out_re = (b1 * val_re - b2 * val_im) * eps
            out_im = (b1 * val_im + b2 * val_re) * eps
            if form.flipped:
                out_im = -out_im
            box = [out_re, out_im]
        if max(x.width for x in box) <= tol:
            return SupportPoint(form.c if not form.flipped else
                                (form.c[0], -form.c[1]),
                                box, None, "inf", None, Fraction(0))
        prec *= 2
    raise PrecisionError("planar_spiral_support: tolerance %s unreachable" % tol)
