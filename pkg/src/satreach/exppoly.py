"""The functions f(t) = c^T e^(At) b as exponential polynomials.

An ``ExpPoly`` stores the exact ingredients (matrix, vectors, spectral
data, rational moments c^T A^k b) and materialises certified
interval coefficients on demand: f(t) = sum over eigenvalue lines of
e^(a t) (Pc(t) cos(b t) + Ps(t) sin(b t)), with a line per real
eigenvalue and per conjugate pair.

``isolate_sign_changes`` certifies the complete sign structure of f on a
bounded horizon: every reported enclosure contains exactly one
nontangential zero (opposite certified signs at its ends, derivative
bounded away from zero); tangential zeros are deliberately never
reported and surface as ``NeedsMoreBudget`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import qlinalg as ql
from .algnum import AlgReal, SpectralStructure, alg_compare, eigen_structure
from .dyadic import DyInterval, PrecisionError, bits, getbits, iv_solve


class NeedsMoreBudget(Exception):
    """Sign certification stalled; possibly a tangential zero."""

    def __init__(self, reason, interval=None, depth=None):
        super().__init__(reason)
        self.reason = reason
        self.interval = interval
        self.depth = depth


class IdenticallyZeroError(ValueError):
    pass


@dataclass
class EigenLine:
    """One real eigenvalue or one conjugate pair (im > 0)."""

    re: AlgReal
    im: AlgReal
    degree: int          # polynomial degree bound (largest block - 1)

    @property
    def is_pair(self) -> bool:
        return not self.im.expr.is_zero


@dataclass
class TermCoeffs:
    line: EigenLine
    pc: list             # low-degree-first coefficients
    ps: list             # same length; unused rows are exact zero for real lines


@dataclass
class SignPattern:
    crossings: list              # disjoint DyInterval enclosures, sorted
    initial_sign: int            # sign of f on (0, first crossing)
    horizon: tuple               # (0, T) as Fractions

    def sign_after(self, i: int) -> int:
        """Sign on the open interval following crossing i (0-based)."""
        return self.initial_sign * (-1) ** (i + 1)

    @property
    def final_sign(self) -> int:
        return self.initial_sign * (-1) ** len(self.crossings)


def _lines_from_spectral(spec: SpectralStructure) -> list:
    lines = []
    for e in spec.eigenvalues:
        if e.is_real:
            lines.append(EigenLine(e.re, AlgReal(0), e.max_block - 1))
        elif e.im.sign() > 0:
            lines.append(EigenLine(e.re, e.im, e.max_block - 1))
    return lines


class _ExpBase:
    """Shared machinery for scalar and vector exponential polynomials."""

    def __init__(self, lines, moments, width, real_spectrum):
        self.lines = lines
        self.moments = moments        # list of length nu; entries: scalars or tuples
        self.width = width            # 1 for scalar, n for vector-valued
        self.real_spectrum = real_spectrum
        self.nu = sum((ln.degree + 1) * (2 if ln.is_pair else 1) for ln in lines)
        self.n0 = sum((ln.degree + 1) * (2 if ln.is_pair else 1) for ln in lines)
        self._coeffs = {}
        self._direct = None           # exact per-line coefficients, bypassing the solve

    def delta_hi(self, prec: int | None = None) -> Fraction:
        """Upper bound on max |eigenvalue| over the complex spectrum."""
        best = Fraction(0)
        for ln in self.lines:
            with bits(prec or getbits()):
                r = ln.re.enclosure(prec)
                i = ln.im.enclosure(prec)
                m = (r * r + i * i).sqrt().hi
            best = max(best, m)
        return best

    # -- coefficient solve -------------------------------------------------

    def coeffs(self, prec: int | None = None) -> list:
        prec = prec or getbits()
        got = self._coeffs.get(prec)
        if got is not None:
            return got
        attempt = prec
        while True:
            try:
                got = self._solve(attempt)
                break
            except PrecisionError:
                attempt *= 2
                if attempt > max(prec, getbits()) * 64:
                    raise
        self._coeffs[prec] = got
        return got

    def _solve(self, prec: int):
        if self._direct is not None:
            out = []
            with bits(prec):
                for ln, pc_exact, ps_exact in self._direct:
                    pc = [_exact_encl(row, prec, self.width) for row in pc_exact]
                    ps = [_exact_encl(row, prec, self.width) for row in ps_exact]
                    out.append(TermCoeffs(ln, pc, ps))
            return out
        nu = self.nu
        with bits(prec):
            cols = []          # (line_idx, 'c'|'s', degree r)
            for idx, ln in enumerate(self.lines):
                for r in range(ln.degree + 1):
                    cols.append((idx, "c", r))
                if ln.is_pair:
                    for r in range(ln.degree + 1):
                        cols.append((idx, "s", r))
            assert len(cols) == nu
            powers = []
            for ln in self.lines:
                a = ln.re.enclosure(prec)
                b = ln.im.enclosure(prec)
                pr, pi = [DyInterval.exact(1)], [DyInterval.exact(0)]
                for _ in range(nu):
                    pr.append(pr[-1] * a - pi[-1] * b)
                    pi.append(pr[-2] * b + pi[-1] * a)
                powers.append((pr, pi))
            flat = []
            for k in range(nu):
                for (idx, kind, r) in cols:
                    if k < r:
                        flat.append(DyInterval.exact(0))
                        continue
                    pr, pi = powers[idx]
                    base = pr[k - r] if kind == "c" else pi[k - r]
                    flat.append(base * (math.comb(k, r) * math.factorial(r)))
            if self.width == 1:
                rhs = [[DyInterval.from_fraction(m) if isinstance(m, (Fraction, int))
                        else m.enclosure(prec) for m in self.moments]]
            else:
                rhs = [[DyInterval.from_fraction(m[i]) if isinstance(m[i], (Fraction, int))
                        else m[i].enclosure(prec) for m in self.moments]
                       for i in range(self.width)]
            sols = iv_solve(flat, rhs, nu)
        out = []
        pos = 0
        for idx, ln in enumerate(self.lines):
            d = ln.degree + 1
            if self.width == 1:
                pc = [sols[0][pos + r] for r in range(d)]
                ps = ([sols[0][pos + d + r] for r in range(d)] if ln.is_pair
                      else [DyInterval.exact(0)] * d)
            else:
                pc = [[sols[i][pos + r] for i in range(self.width)] for r in range(d)]
                ps = ([[sols[i][pos + d + r] for i in range(self.width)] for r in range(d)]
                      if ln.is_pair else [[DyInterval.exact(0)] * self.width for _ in range(d)])
            out.append(TermCoeffs(ln, pc, ps))
            pos += d * (2 if ln.is_pair else 1)
        return out

    # -- evaluation ---------------------------------------------------------

    def _eval_terms(self, terms, t: DyInterval, prec: int):
        with bits(prec):
            if self.width == 1:
                acc = DyInterval.exact(0)
            else:
                acc = [DyInterval.exact(0)] * self.width
            for tc in terms:
                a = tc.line.re.enclosure(prec)
                growth = (a * t).exp()
                if tc.line.is_pair:
                    b = tc.line.im.enclosure(prec)
                    cosb, sinb = (b * t).cos(), (b * t).sin()
                else:
                    cosb, sinb = DyInterval.exact(1), DyInterval.exact(0)
                if self.width == 1:
                    val = _horner(tc.pc, t) * cosb
                    if tc.line.is_pair:
                        val = val + _horner(tc.ps, t) * sinb
                    acc = acc + growth * val
                else:
                    for i in range(self.width):
                        val = _horner([row[i] for row in tc.pc], t) * cosb
                        if tc.line.is_pair:
                            val = val + _horner([row[i] for row in tc.ps], t) * sinb
                        acc[i] = acc[i] + growth * val
            return acc

    def eval(self, t: DyInterval, prec: int | None = None):
        prec = prec or getbits()
        return self._eval_terms(self.coeffs(prec), t, prec)


def _exact_encl(row, prec, width):
    """Enclose one exact coefficient (scalar or vector row)."""
    def one(v):
        if isinstance(v, AlgReal):
            return v.enclosure(prec)
        return DyInterval.from_fraction(Fraction(v), prec)

    if width == 1:
        return one(row)
    return [one(v) for v in row]


def _horner(coeffs, x: DyInterval) -> DyInterval:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _deriv_terms(terms, prec: int):
    """Derivative of a scalar term list, shared eigenvalue lines."""
    out = []
    with bits(prec):
        for tc in terms:
            a = tc.line.re.enclosure(prec)
            b = tc.line.im.enclosure(prec)
            d = len(tc.pc)
            zero = DyInterval.exact(0)

            def dp(p):
                return [p[r + 1] * (r + 1) for r in range(d - 1)] + [zero]

            npc = [u + x * a + y * b for u, x, y in zip(dp(tc.pc), tc.pc, tc.ps)]
            nps = [u + y * a - x * b for u, x, y in zip(dp(tc.ps), tc.pc, tc.ps)]
            out.append(TermCoeffs(tc.line, npc, nps))
    return out


class ExpPoly(_ExpBase):
    """Scalar f(t) = c^T e^(At) b with certified evaluation."""

    def __init__(self, lines, moments, real_spectrum, n_dim, all_moments):
        super().__init__(lines, moments, 1, real_spectrum)
        self.n = n_dim
        self.all_moments = tuple(all_moments)
        self.identically_zero = all(_is_zero_scalar(m) for m in all_moments)
        self._deriv_cache = {}

    def initial_sign_exact(self) -> int:
        """Sign of f on (0, eps), from the first nonzero derivative at 0.

        Exact: f^(k)(0) = c^T A^k b, so near 0 the first nonvanishing
        moment rules the sign.
        """
        for m in self.all_moments:
            s = _scalar_sign(m)
            if s:
                return s
        raise IdenticallyZeroError("f is identically zero")

    def sign_at_zero(self) -> int:
        return _scalar_sign(self.all_moments[0])

    def deriv_eval(self, t: DyInterval, prec: int | None = None) -> DyInterval:
        prec = prec or getbits()
        terms = self._deriv_cache.get(prec)
        if terms is None:
            terms = _deriv_terms(self.coeffs(prec), prec)
            self._deriv_cache[prec] = terms
        return self._eval_terms(terms, t, prec)


def _is_zero_scalar(m) -> bool:
    if isinstance(m, (int, Fraction)):
        return m == 0
    return m.sign() == 0


def _scalar_sign(m) -> int:
    if isinstance(m, (int, Fraction)):
        return (m > 0) - (m < 0)
    return m.sign()


class FlowCurve(_ExpBase):
    """Vector curve e^(At) b with certified evaluation and antiderivative."""

    def __init__(self, lines, moment_vectors, real_spectrum, n_dim):
        super().__init__(lines, moment_vectors, n_dim, real_spectrum)
        self.n = n_dim
        self._anti_cache = {}

    def antider_terms(self, prec: int):
        """Terms of F with F'(t) = e^(At) b (up to an additive constant).

        Lines with eigenvalue 0 (nilpotent directions) integrate as plain
        polynomials; all other lines use the degree recurrence from
        d/dt [e^(at)(Rc cos bt + Rs sin bt)].
        """
        got = self._anti_cache.get(prec)
        if got is not None:
            return got
        out = []
        terms = self.coeffs(prec)
        with bits(prec):
            for tc in terms:
                a = tc.line.re.enclosure(prec)
                b = tc.line.im.enclosure(prec)
                zero_line = tc.line.re.expr.is_zero and tc.line.im.expr.is_zero
                d = len(tc.pc)
                zvec = [DyInterval.exact(0)] * self.width
                if zero_line:
                    rc = [zvec] + [
                        [x * Fraction(1, r + 1) for x in tc.pc[r]] for r in range(d)
                    ]
                    out.append(TermCoeffs(tc.line, rc, [list(zvec) for _ in range(d + 1)]))
                    continue
                if a.contains_zero() and b.contains_zero():
                    raise PrecisionError("nonzero eigenvalue enclosure straddles zero")
                det = (a * a + b * b).recip()
                rc = [None] * d
                rs = [None] * d
                for k in range(d - 1, -1, -1):
                    uc, us = tc.pc[k], tc.ps[k]
                    if k + 1 < d:
                        uc = [x - y * (k + 1) for x, y in zip(uc, rc[k + 1])]
                        us = [x - y * (k + 1) for x, y in zip(us, rs[k + 1])]
                    rc[k] = [(a * x - b * y) * det for x, y in zip(uc, us)]
                    rs[k] = [(b * x + a * y) * det for x, y in zip(uc, us)]
                out.append(TermCoeffs(tc.line, rc, rs))
        self._anti_cache[prec] = out
        return out

    def antider_eval(self, t: DyInterval, prec: int | None = None) -> list:
        prec = prec or getbits()
        return self._eval_terms(self.antider_terms(prec), t, prec)

    def definite_integral(self, t0: DyInterval, t1: DyInterval,
                          prec: int | None = None) -> list:
        a = self.antider_eval(t0, prec)
        b = self.antider_eval(t1, prec)
        return [y - x for x, y in zip(a, b)]


def _structure_for(a_rows, spec):
    if spec is None:
        spec = eigen_structure(a_rows)
    return spec, _lines_from_spectral(spec)


def form_fc(a_rows, b_vec, c_vec, spectral: SpectralStructure | None = None) -> ExpPoly:
    """Build f(t) = c^T e^(At) b for a rational system.

    Identically-zero detection is exact: f == 0 iff c annihilates the
    Krylov space of (A, b), i.e. all n moments c^T A^k b vanish.
    """
    a = ql.mat(a_rows)
    n = len(a)
    b = ql.vec(b_vec)
    c = ql.vec(c_vec)
    spec, lines = _structure_for(a, spectral)
    nu = sum((ln.degree + 1) * (2 if ln.is_pair else 1) for ln in lines)
    moments = []
    cur = b
    for _ in range(max(nu, n)):
        moments.append(ql.vec_dot_q(c, cur))
        cur = ql.mat_vec_q(a, cur)
    return ExpPoly(lines, moments[:nu], spec.real_spectrum, n, moments[:n])


def flow_curve(a_rows, b_vec, spectral: SpectralStructure | None = None) -> FlowCurve:
    """Build the vector curve e^(At) b."""
    a = ql.mat(a_rows)
    n = len(a)
    b = ql.vec(b_vec)
    spec, lines = _structure_for(a, spectral)
    nu = sum((ln.degree + 1) * (2 if ln.is_pair else 1) for ln in lines)
    moments = []
    cur = b
    for _ in range(nu):
        moments.append(tuple(cur))
        cur = ql.mat_vec_q(a, cur)
    return FlowCurve(lines, moments, spec.real_spectrum, n)


def zero_count_bound(f: ExpPoly, radius) -> int:
    """Bound on the number of zeros of f in the complex ball of radius R:
    3(n0 - 1) + 4 R Delta, capped at n - 1 for real spectrum (valid since
    f not identically zero forces b, c nonzero).
    """
    if f.identically_zero:
        raise IdenticallyZeroError("identically zero function has no zero bound")
    r = Fraction(radius)
    delta = f.delta_hi()
    raw = Fraction(3) * (f.n0 - 1) + 4 * r * delta
    bound = math.ceil(raw)
    if f.real_spectrum:
        bound = min(bound, f.n - 1)
    return bound


def isolate_sign_changes(
    f: ExpPoly,
    horizon,
    depth_budget: int = 60,
    crossing_width=None,
    prec: int | None = None,
) -> SignPattern:
    """Certify the nontangential sign structure of f on [0, T].

    Each returned enclosure has certified opposite signs of f at its two
    endpoints and a certified nonzero derivative across it, hence exactly
    one zero, which is a sign change.  Sign-preserving (tangential) zeros
    are never reported: a region that refuses sign certification raises
    NeedsMoreBudget once the depth budget is exhausted, as does a zero
    located exactly at the horizon T.
    """
    if f.identically_zero:
        raise IdenticallyZeroError("cannot isolate sign changes of 0")
    T = Fraction(horizon if not isinstance(horizon, tuple) else horizon[1])
    if T <= 0:
        raise ValueError("horizon must be positive")
    prec = prec or getbits()
    target_w = Fraction(crossing_width) if crossing_width else T * Fraction(1, 2) ** max(
        24, prec // 4
    )
    s0 = f.initial_sign_exact()
    crossings = _resolve(f, Fraction(0), T, s0, None, target_w, prec, depth_budget, 0)
    return SignPattern(crossings, s0, (Fraction(0), T))


def _subdivide(f, lo, hi, floor_w, prec, budget):
    """Refine [lo, hi] into sign-certified blocks and small undecided gaps."""
    pieces = []
    stack = [(lo, hi, 0)]
    while stack:
        a, b, depth = stack.pop()
        s = f.eval(DyInterval.from_endpoints(a, b), prec).sign()
        if s or b - a <= floor_w:
            pieces.append((a, b, s))
            continue
        if depth > budget:
            raise NeedsMoreBudget("depth budget exhausted", (float(a), float(b)), depth)
        m = (a + b) / 2
        stack.append((m, b, depth + 1))
        stack.append((a, m, depth + 1))
    pieces.sort(key=lambda seg: seg[0])
    merged = []
    for seg in pieces:
        if merged and merged[-1][2] == seg[2]:
            merged[-1] = (merged[-1][0], seg[1], seg[2])
        else:
            merged.append(seg)
    return merged


def _resolve(f, lo, hi, left_sign, right_sign, floor_w, prec, budget, depth):
    """Crossing enclosures on [lo, hi] given certified flanking signs.

    ``right_sign`` None means the segment ends at the analysis horizon.
    Recursion refines by a factor 16 in width and doubles precision; only
    enclosures that pass the nontangentiality certificate are emitted.
    """
    if depth > 24:
        raise NeedsMoreBudget("recursive refinement exhausted", (float(lo), float(hi)), depth)
    blocks = _subdivide(f, lo, hi, floor_w, prec, budget)
    crossings = []
    cur = left_sign
    for i, (a, b, s) in enumerate(blocks):
        if s != 0:
            if s != cur:
                # Continuity makes adjacent certified opposite signs impossible.
                raise NeedsMoreBudget("inconsistent certified signs", (float(a), float(b)), depth)
            continue
        nxt = blocks[i + 1][2] if i + 1 < len(blocks) else right_sign
        if nxt is not None and nxt == -cur:
            try:
                enc = _certify_crossing(f, a, b, cur, prec, budget)
            except NeedsMoreBudget:
                sub = _resolve(f, a, b, cur, nxt, floor_w / 16, prec * 2, budget, depth + 1)
                if len(sub) % 2 == 0:
                    raise NeedsMoreBudget("lost a crossing during refinement",
                                          (float(a), float(b)), depth)
                crossings.extend(sub)
                cur = nxt
                continue
            crossings.append(enc)
            cur = nxt
        else:
            # Equal flanks (possible tangential zero or a close crossing
            # pair) or a gap touching the horizon: refine further.
            sub = _resolve(f, a, b, cur, nxt, floor_w / 16, prec * 2, budget, depth + 1)
            if nxt is not None and len(sub) % 2 != 0:
                raise NeedsMoreBudget("parity mismatch during refinement",
                                      (float(a), float(b)), depth)
            crossings.extend(sub)
            for _ in sub:
                cur = -cur
    if right_sign is not None and cur != right_sign:
        raise NeedsMoreBudget("sign bookkeeping mismatch", (float(lo), float(hi)), depth)
    return crossings


def _certify_crossing(f, lo, hi, left_sign, prec, budget) -> DyInterval:
    """Certify exactly one sign change in [lo, hi] (flanks already opposite).

    Requires a certified nonzero f' across the enclosure; trims only
    slices on which f has a certified constant sign, so no zero is ever
    discarded.
    """
    cur_lo, cur_hi = lo, hi
    p = prec
    for _ in range(budget):
        d = f.deriv_eval(DyInterval.from_endpoints(cur_lo, cur_hi), p)
        if d.sign() != 0:
            return DyInterval.from_endpoints(cur_lo, cur_hi)
        quarter = (cur_hi - cur_lo) / 4
        trimmed = False
        left_slice = f.eval(DyInterval.from_endpoints(cur_lo, cur_lo + quarter), p)
        if left_slice.sign() != 0:
            cur_lo += quarter
            trimmed = True
        right_slice = f.eval(DyInterval.from_endpoints(cur_hi - quarter, cur_hi), p)
        if right_slice.sign() != 0:
            cur_hi -= quarter
            trimmed = True
        if not trimmed:
            p *= 2
            if p > prec * 64:
                break
    raise NeedsMoreBudget("cannot certify nontangentiality",
                          (float(lo), float(hi)), budget)


def _group_diag(entries):
    """Group equal diagonal values; returns (values, index-groups)."""
    from .algnum import alg_compare as _cmp

    vals = []
    groups = []
    for i, d in enumerate(entries):
        dv = d if isinstance(d, AlgReal) else AlgReal(Fraction(d))
        for gi, v in enumerate(vals):
            if _cmp(v, dv) == 0:
                groups[gi].append(i)
                break
        else:
            vals.append(dv)
            groups.append([i])
    return vals, groups


def form_fc_diag(diag_entries, b_vec, c_vec) -> ExpPoly:
    """f(t) = c^T e^(At) b for A = diag(entries), entries real algebraic.

    Coefficients are exact: the group of indices sharing the eigenvalue
    mu contributes sum(c_i b_i) e^(mu t).
    """
    b = [Fraction(x) for x in b_vec]
    c = [Fraction(x) for x in c_vec]
    vals, groups = _group_diag(diag_entries)
    lines = []
    direct = []
    weights = []
    for v, g in zip(vals, groups):
        w = sum((c[i] * b[i] for i in g), Fraction(0))
        ln = EigenLine(v, AlgReal(0), 0)
        lines.append(ln)
        direct.append((ln, [w], [Fraction(0)]))
        weights.append(w)
    # moments sum(w mu^k) stay exact for the initial-sign test
    moments = []
    n = len(b)
    for k in range(n):
        acc = AlgReal(0)
        for v, w in zip(vals, weights):
            if w:
                term = AlgReal(v.expr ** k) * AlgReal(w)
                acc = acc + term
        moments.append(acc)
    real_spec = True
    f = ExpPoly(lines, [None] * sum(1 for _ in lines), real_spec, n, moments)
    f.identically_zero = all(w == 0 for w in weights)
    f._direct = direct
    return f


def flow_curve_diag(diag_entries, b_vec) -> FlowCurve:
    """e^(At) b for diagonal A: coordinate i carries b_i e^(mu_i t)."""
    b = [Fraction(x) for x in b_vec]
    n = len(b)
    vals, groups = _group_diag(diag_entries)
    lines = []
    direct = []
    for v, g in zip(vals, groups):
        ln = EigenLine(v, AlgReal(0), 0)
        row = [Fraction(0)] * n
        for i in g:
            row[i] = b[i]
        lines.append(ln)
        direct.append((ln, [row], [[Fraction(0)] * n]))
    fc = FlowCurve(lines, [None] * len(lines), True, n)
    fc._direct = direct
    return fc
