"""Inner/outer polytope sandwich and the membership semi-decision loop.

The reachable set of a plan is sandwiched between an inner polytope
(certified inside the closure) and an outer polytope (certified to
contain the set).  Outer halfspaces come straight from support-point
upper bounds.  Inner vertices use the erosion certificate: if each
support enclosure box contains a true boundary point within L2 distance
r of its midpoint, then the hull of the midpoints eroded by r is inside
the convex hull of the true points, hence inside the closure.

Verdicts only ever rely on those one-sided certificates, so Reachable /
NotReachable never flip under refinement; the certified Hausdorff gap
between the polytopes is computed exactly in dimensions <= 2 (adaptive
angular refinement); parts of dimension >= 3 get sound inner and outer
polytopes but only a sampled gap estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import sympy

from . import geom2d as g2
from . import qlinalg as ql
from .algnum import AlgReal
from .boundary import SupportPoint, support_point, support_point_bounded
from .decomp import DecompositionPlan, PlanPart, build_plan
from .dyadic import DyInterval
from .exppoly import NeedsMoreBudget
from .model import Bounded, Hypercube, Infinite, PointTarget, ReachProblem


@dataclass
class PolytopePair:
    dim: int
    inner: list                  # vertices (tuples of Fraction), certified in closure
    outer: list                  # (direction tuple, upper Fraction): c.x <= u certified
    gap: Fraction | None         # certified d_H upper bound (dim <= 2)
    precision: int               # achieved p (gap <= 2^-p) when gap is not None
    lineality: tuple = ()        # free directions: set is unbounded along these

    def outer_contains(self, point, strict=False) -> bool:
        for c, u in self.outer:
            v = sum((Fraction(x) * Fraction(y) for x, y in zip(c, point)),
                    Fraction(0))
            if strict:
                if not v < u:
                    return False
            elif v > u:
                return False
        return True

    def inner_contains(self, point, strict=True) -> bool:
        if self.dim > 2:
            return False
        if self.dim == 0:
            return not strict
        if self.dim == 1:
            xs = [v[0] for v in self.inner]
            if not xs:
                return False
            x = Fraction(point[0])
            return min(xs) < x < max(xs) if strict else min(xs) <= x <= max(xs)
        return g2.point_in_polygon(point, self.inner, strict=strict)


@dataclass
class MembershipVerdict:
    kind: str                    # Reachable | NotReachable | BoundaryHit | Unknown
    witness: object = None
    precision: int | None = None
    gap: Fraction | None = None
    detail: str = ""

    def __bool__(self):
        return self.kind == "Reachable"


REACHABLE = "Reachable"
NOT_REACHABLE = "NotReachable"
BOUNDARY_HIT = "BoundaryHit"
UNKNOWN = "Unknown"


def resolve_boundary(verdict: MembershipVerdict, horizon) -> MembershipVerdict:
    """Boundary points belong to closed bounded-horizon sets only."""
    if verdict.kind != BOUNDARY_HIT:
        return verdict
    if isinstance(horizon, Bounded):
        return MembershipVerdict(REACHABLE, verdict.witness, verdict.precision,
                                 detail="boundary point; bounded-horizon set is closed")
    return MembershipVerdict(NOT_REACHABLE, verdict.witness, verdict.precision,
                             detail="boundary point; infinite-horizon set is open")


# -- direction bookkeeping ---------------------------------------------------


def _base_directions(d: int):
    if d == 1:
        return [(Fraction(1),), (Fraction(-1),)]
    if d == 2:
        out = []
        for a, b in ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1),
                     (1, -1)):
            out.append((Fraction(a), Fraction(b)))
        return out
    dirs = []
    for i in range(d):
        for s in (1, -1):
            v = [Fraction(0)] * d
            v[i] = Fraction(s)
            dirs.append(tuple(v))
    for signs in range(1 << d):
        v = tuple(Fraction(1 if (signs >> i) & 1 else -1) for i in range(d))
        dirs.append(v)
    return dirs


def _mid_direction(c1, c2):
    v = [a + b for a, b in zip(c1, c2)]
    nums = [x.numerator for x in v]
    dens = [x.denominator for x in v]
    scale = 1
    for q in dens:
        scale = scale * q // gcd(scale, q)
    ints = [int(x * scale) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    if all(x == 0 for x in ints):
        return None
    return tuple(Fraction(x) for x in ints)


# -- the plan-level sandwich -------------------------------------------------


@dataclass
class PlanFrame:
    """Exact coordinates: ambient = S y_span + F y_free (+ nothing else)."""

    plan: DecompositionPlan
    d: int
    s_cols: tuple            # ambient basis of the parts span (d columns)
    basis: tuple             # full invertible n x n (S | F | completion)
    free_dims: int

    def split_target(self, y):
        """(y_span coords, ok) with ok False when y leaves the reachable span."""
        n = self.plan.n
        mat = sympy.Matrix([[_sym(self.basis[i][j]) for j in range(n)]
                            for i in range(n)])
        vec = sympy.Matrix([_sym(v) for v in y])
        sol = mat.solve(vec)
        coords = list(sol)
        for k in range(self.d + self.free_dims, n):
            if sympy.simplify(coords[k]) != 0:
                return None, False
        span = coords[: self.d]
        out = []
        for v in span:
            if v.is_Rational:
                out.append(Fraction(int(v.p), int(v.q)))
            else:
                out.append(AlgReal(v))
        return tuple(out), True


def _sym(x):
    if isinstance(x, AlgReal):
        return x.expr
    f = Fraction(x)
    return sympy.Rational(f.numerator, f.denominator)


def plan_frame(plan: DecompositionPlan) -> PlanFrame:
    n = plan.n
    cols = []
    for part in plan.parts:
        for j in range(part.k):
            cols.append(tuple(part.embed[i][j] for i in range(n)))
    rational = all(isinstance(x, Fraction) for col in cols for x in col)
    incl = []
    for col in cols:
        trial = incl + [col]
        if rational:
            m = tuple(zip(*trial))
            if ql.rank(ql.mat(m)) == len(trial):
                incl.append(col)
        else:
            m = sympy.Matrix([[_sym(x) for x in c] for c in trial]).T
            if m.rank() == len(trial):
                incl.append(col)
    d = len(incl)
    all_cols = incl + [tuple(v) for v in plan.free_basis]
    if all(isinstance(x, Fraction) for col in all_cols for x in col):
        basis = ql.extend_to_basis(all_cols, n)
    else:
        basis = _extend_sym(all_cols, n)
    return PlanFrame(plan, d, tuple(incl), basis, len(plan.free_basis))


def _extend_sym(cols, n):
    cur = [list(c) for c in cols]
    for j in range(n):
        e = [sympy.Integer(int(i == j)) for i in range(n)]
        trial = cur + [e]
        if sympy.Matrix([[_sym(x) for x in c] for c in trial]).T.rank() == len(trial):
            cur.append(e)
        if len(cur) == n:
            break
    return tuple(tuple(cur[j][i] for j in range(n)) for i in range(n))


def _part_coords_embed(frame: PlanFrame, part: PlanPart):
    """Part embedding expressed in the span coordinates (d x k, exact)."""
    n = frame.plan.n
    mat = sympy.Matrix([[_sym(frame.basis[i][j]) for j in range(n)]
                        for i in range(n)])
    emb = sympy.Matrix([[_sym(part.embed[i][j]) for j in range(part.k)]
                        for i in range(n)])
    sol = mat.solve(emb)
    out = []
    for i in range(frame.d):
        row = []
        for j in range(part.k):
            v = sol[i, j]
            if not v.is_Rational:
                raise NeedsMoreBudget("non-rational embedding coordinates")
            row.append(Fraction(int(v.p), int(v.q)))
        out.append(tuple(row))
    for i in range(frame.d, n):
        for j in range(part.k):
            if sympy.simplify(sol[i, j]) != 0:
                raise AssertionError("embedding leaves the span")
    return tuple(out)


class PlanSandwich:
    """Incrementally refined inner/outer pair for a whole plan."""

    def __init__(self, plan: DecompositionPlan, frame: PlanFrame | None = None):
        self.plan = plan
        self.frame = frame or plan_frame(plan)
        self.embeds = [_part_coords_embed(self.frame, part) for part in plan.parts]
        self._cache = {}          # (part index, direction) -> SupportPoint
        self.directions = list(_base_directions(self.frame.d)) if self.frame.d else []
        self.horizon = plan.horizon

    def _support(self, idx: int, c_part, tol) -> SupportPoint:
        key = (idx, c_part, tol)
        got = self._cache.get(key)
        if got is not None:
            return got
        part = self.plan.parts[idx]
        if isinstance(self.horizon, Bounded):
            sp = support_point_bounded(part.a, part.b, c_part, self.horizon.tau,
                                       tol, part.spectral)
        else:
            sp = support_point(part.a, part.b, c_part, tol, part.spectral)
        self._cache[key] = sp
        return sp

    def evaluate(self, direction, tol):
        """(upper bound of h(c), inner midpoint, L2-radius^2 bound) at c."""
        d = self.frame.d
        upper = Fraction(0)
        mid = [Fraction(0)] * d
        rad2 = Fraction(0)
        for idx, part in enumerate(self.plan.parts):
            emb = self.embeds[idx]
            c_part = tuple(
                sum((emb[i][j] * direction[i] for i in range(d)), Fraction(0))
                for j in range(part.k)
            )
            if all(x == 0 for x in c_part):
                continue  # the part contributes its own origin (inside)
            sp = self._support(idx, c_part, tol)
            # map the enclosure through the embedding into span coordinates
            box = [DyInterval.exact(0)] * d
            for i in range(d):
                acc = DyInterval.exact(0)
                for j in range(part.k):
                    acc = acc + DyInterval.from_fraction(emb[i][j]) * sp.enclosure[j]
                box[i] = acc
            for i in range(d):
                mid[i] += box[i].mid
                rad2 += box[i].rad ** 2
            up = DyInterval.exact(0)
            for i in range(d):
                up = up + box[i] * DyInterval.from_fraction(direction[i])
            upper += up.hi
        return upper, tuple(mid), rad2

    def build(self, p: int, max_rounds: int = 400) -> PolytopePair:
        """Refine directions until the certified gap is <= 2^-p (dim <= 2)."""
        d = self.frame.d
        target = Fraction(1, 1 << p)
        tol = Fraction(1, 1 << (p + 4))
        lineality = tuple(tuple(v) for v in self.plan.free_basis)
        if d == 0:
            return PolytopePair(0, [()], [], Fraction(0), p, lineality)
        if not self.plan.parts:
            return PolytopePair(d, [], [], None, p, lineality)
        if d == 1:
            up, mid_p, r2_p = self.evaluate((Fraction(1),), tol)
            un, mid_n, r2_n = self.evaluate((Fraction(-1),), tol)
            r = _sqrt_hi(max(r2_p, r2_n))
            lo_in = mid_n[0] + r
            hi_in = mid_p[0] - r
            inner = [(lo_in,), (hi_in,)] if lo_in <= hi_in else []
            outer = [((Fraction(1),), up), ((Fraction(-1),), un)]
            if inner:
                gap = max(Fraction(0), up - hi_in, un + lo_in)
            else:
                gap = max(Fraction(0), up + un)
            return PolytopePair(1, inner, outer, gap, p, lineality)
        if d == 2:
            return self._build_2d(p, target, tol, lineality, max_rounds)
        return self._build_nd(p, tol, lineality)

    def _build_2d(self, p, target, tol, lineality, max_rounds):
        grain = Fraction(1, 1 << (p + 10))
        local_target = target / 2
        evals = {}

        def ev(c):
            got = evals.get(c)
            if got is None:
                u, mid, r2 = self.evaluate(c, tol)
                u = _round_up(u, grain)
                midr = tuple(_round_near(x, grain) for x in mid)
                # midpoint rounding moves each coordinate by <= grain
                rad = _sqrt_hi(r2) + 2 * grain
                got = (u, midr, rad * rad)
                evals[c] = got
            return got

        for c in self.directions:
            ev(c)
        for _ in range(max_rounds):
            dirs = sorted(evals.keys(), key=_angle_key)
            k = len(dirs)
            inserted = []
            for i in range(k):
                c1, c2 = dirs[i], dirs[(i + 1) % k]
                u1, m1, _ = evals[c1]
                u2, m2, _ = evals[c2]
                corner = _corner(c1, u1, c2, u2)
                if corner is None:
                    continue
                d2 = g2.dist2_point_segment(corner, m1, m2)
                if _sqrt_hi(d2) > local_target:
                    m = _mid_direction(c1, c2)
                    if m is not None and m not in evals:
                        inserted.append(m)
            if inserted:
                if len(evals) + len(inserted) > 4096:
                    raise NeedsMoreBudget(
                        "direction budget exhausted",
                        tuple(float(x) for x in inserted[0]))
                for m in inserted:
                    ev(m)
                continue
            # local criterion satisfied everywhere: certify globally
            mids = [evals[c][1] for c in dirs]
            r2 = max(evals[c][2] for c in dirs)
            hull = g2.convex_hull(mids)
            inner = g2.erode_polygon(hull, r2) if len(hull) >= 3 else []
            hps = [(c[0], c[1], evals[c][0]) for c in dirs]
            bound = max(abs(u) for u, _, _ in evals.values()) + 1
            outer_poly = g2.halfplane_polygon(hps, bound * 4)
            if inner and outer_poly:
                gap = g2.hausdorff_upper(inner, outer_poly)
                if gap <= target:
                    outer = [((c[0], c[1]), evals[c][0]) for c in dirs]
                    return PolytopePair(2, inner, outer, gap, p, lineality)
            # not certified: tighter enclosures, finer local criterion
            tol = tol / 4
            local_target = local_target / 2
            old = list(evals.keys())
            evals = {}
            for c in old:
                ev(c)
        raise NeedsMoreBudget("2d sandwich refinement exhausted", None)

    def _build_nd(self, p, tol, lineality):
        """Dimension >= 3: certified outer halfspaces only.

        Inner certificates (hence Reachable verdicts) are not produced
        here; callers get sound NotReachable tests and an outer hull.
        """
        evals = {}
        for c in self.directions:
            evals[c] = self.evaluate(c, tol)
        outer = [(c, evals[c][0]) for c in evals]
        return PolytopePair(self.frame.d, [], outer, None, p, lineality)


def _round_up(x: Fraction, grain: Fraction) -> Fraction:
    q = x / grain
    return Fraction(-((-q.numerator) // q.denominator)) * grain


def _round_near(x: Fraction, grain: Fraction) -> Fraction:
    q = x / grain
    return Fraction(round(q.numerator / q.denominator)) * grain if q.denominator > (1 << 62) else Fraction((2 * q.numerator + q.denominator) // (2 * q.denominator)) * grain


def _corner(c1, u1, c2, u2):
    det = c1[0] * c2[1] - c1[1] * c2[0]
    if det == 0:
        return None
    x = (u1 * c2[1] - u2 * c1[1]) / det
    y = (c1[0] * u2 - c2[0] * u1) / det
    return (x, y)


def _sqrt_hi(x: Fraction) -> Fraction:
    return DyInterval.from_fraction(Fraction(x), 96).sqrt().hi


def _angle_key(c):
    from math import atan2

    return atan2(float(c[1]), float(c[0]))


def _vertex_of(v, u, c) -> bool:
    """Does the halfplane c.x <= u pass through v (within exact equality)?"""
    return c[0] * v[0] + c[1] * v[1] == u


def build_polytope_pair(part_a, part_b, p: int, horizon=None,
                        spectral=None) -> PolytopePair:
    """Sandwich for a single stable controllable pair (C, b), U = [-1, 1].

    ``horizon`` None or Infinite() for the open infinite-horizon set;
    Bounded(tau) for the closed bounded-horizon set.
    """
    from .model import Hypercube as _H

    n = len(part_a)
    part = PlanPart(tuple(tuple(row) for row in part_a), tuple(part_b),
                    ql.identity(n), spectral, 0, ("single part",))
    if part.spectral is None:
        from .algnum import eigen_structure

        from .boundary import _alg_diag_entries
        diag = _alg_diag_entries(part.a)
        if diag is not None:
            from .algnum import spectral_structure_of_algebraic_diagonal

            part.spectral = spectral_structure_of_algebraic_diagonal(diag)
        else:
            part.spectral = eigen_structure(part.a)
    plan = DecompositionPlan(n, horizon or Infinite(), [part], (), ())
    return PlanSandwich(plan).build(p)


def minkowski_combine(pairs_with_embeddings, free_basis=()) -> PolytopePair:
    """Combine part pairs through exact embeddings (ambient = embed @ part).

    inner: Minkowski sum of the embedded inner polytopes (sound: sums of
    closure points stay in the closure of the sum).  outer: support
    additivity h(c) = sum_i h_i(P_i^T c), evaluated at ambient directions
    lifted from each stored halfspace and kept only when every pair has a
    stored bound for its pullback (dropping directions is sound).
    """
    if not pairs_with_embeddings:
        raise ValueError("nothing to combine")
    pairs = [(pair, tuple(tuple(Fraction(x) for x in row) for row in embed))
             for pair, embed in pairs_with_embeddings]
    dim = len(pairs[0][1])
    combined = [tuple(Fraction(0) for _ in range(dim))]
    for pair, embed in pairs:
        pts = [_embed_point(v, embed) for v in pair.inner]
        if not pts:
            combined = []
            break
        if dim == 2:
            combined = g2.minkowski_sum(combined, pts)
        else:
            combined = [tuple(a + b for a, b in zip(x, y))
                        for x in combined for y in pts]
    candidates = []
    for pair, embed in pairs:
        lift = _lift_matrix(embed)
        for c, u in pair.outer:
            amb = _lift_direction(c, lift)
            if amb is not None and amb not in candidates:
                candidates.append(amb)
    outer = []
    for amb in candidates:
        total = Fraction(0)
        ok = True
        for pair, embed in pairs:
            k = len(embed[0])
            c_part = tuple(
                sum((embed[i][j] * amb[i] for i in range(dim)), Fraction(0))
                for j in range(k)
            )
            u = _outer_value(pair, c_part)
            if u is None:
                ok = False
                break
            total += u
        if ok:
            outer.append((amb, total))
    gap = None
    if dim == 2 and len(combined) >= 3 and outer:
        hps = [(c[0], c[1], u) for c, u in outer]
        bound = max(abs(u) for _, u in outer) + 1
        op = g2.halfplane_polygon(hps, bound * 4)
        if op:
            gap = g2.hausdorff_upper(combined, op)
    return PolytopePair(dim, combined, outer, gap, 0, tuple(free_basis))


def _embed_point(v, embed):
    dim = len(embed)
    k = len(embed[0]) if embed else 0
    return tuple(
        sum((embed[i][j] * Fraction(v[j]) for j in range(k)), Fraction(0))
        for i in range(dim)
    )


def _lift_matrix(embed):
    """embed @ (embed^T embed)^-1: maps part directions to ambient ones."""
    dim, k = len(embed), len(embed[0])
    et = tuple(tuple(embed[i][j] for i in range(dim)) for j in range(k))
    gram = ql.mat_mul(et, embed)
    ginv = ql.inverse(gram)
    return ql.mat_mul(embed, ginv)


def _lift_direction(c_part, lift):
    amb = ql.mat_vec_q(lift, ql.vec(c_part))
    if all(x == 0 for x in amb):
        return None
    # normalise to a primitive integer vector for stable matching
    dens = 1
    for x in amb:
        dens = dens * x.denominator // gcd(dens, x.denominator)
    ints = [int(x * dens) for x in amb]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(Fraction(x // g) for x in ints)


# -- membership --------------------------------------------------------------


def membership_semidecide(problem: ReachProblem, y=None, max_p: int = 16,
                          boundary_oracle=None, start_p: int = 3,
                          plan: DecompositionPlan | None = None) -> MembershipVerdict:
    """Iteratively deepened sandwich membership for a point target.

    Reachable requires strict interior of the inner polytope (the open
    infinite-horizon set) or plain containment for bounded horizons;
    NotReachable requires strict violation of a certified outer
    halfspace.  The exact module's boundary test runs first when given.
    """
    if y is None:
        if not isinstance(problem.target, PointTarget):
            raise ValueError("membership needs a point target")
        y = problem.target.point
    if not isinstance(problem.input_set, Hypercube):
        raise ValueError("membership is defined for hypercube inputs")
    bounded = isinstance(problem.horizon, Bounded)
    if boundary_oracle is not None:
        hit = boundary_oracle(y)
        if hit is not None:
            return hit
    plan = plan or build_plan(problem)
    frame = plan_frame(plan)
    span, ok = frame.split_target(y)
    if not ok:
        return MembershipVerdict(NOT_REACHABLE, witness="outside reachable span",
                                 detail="target leaves span(parts) + free factor")
    if frame.d == 0:
        return MembershipVerdict(REACHABLE, detail="free directions only")
    span_rat = []
    for v in span:
        if isinstance(v, AlgReal):
            if v.is_rational:
                span_rat.append(v.to_fraction())
            else:
                span_rat.append(v)
        else:
            span_rat.append(Fraction(v))
    sandwich = PlanSandwich(plan, frame)
    gap = None
    for p in range(start_p, max_p + 1):
        try:
            pair = sandwich.build(p)
        except NeedsMoreBudget as nb:
            return MembershipVerdict(UNKNOWN, witness=nb.reason, gap=gap,
                                     detail="sign isolation stalled")
        gap = pair.gap
        verdict = _pair_verdict(pair, span_rat, bounded)
        if verdict is not None:
            verdict.precision = p
            return verdict
    return MembershipVerdict(UNKNOWN, gap=gap, precision=max_p,
                             detail="max precision reached")


def _pair_verdict(pair: PolytopePair, span, bounded: bool):
    exact = all(isinstance(x, Fraction) for x in span)
    if exact:
        for c, u in pair.outer:
            v = sum((ci * x for ci, x in zip(c, span)), Fraction(0))
            if v > u:
                return MembershipVerdict(NOT_REACHABLE, witness=(tuple(c), u),
                                         detail="separating halfspace")
        if pair.inner_contains(span, strict=not bounded):
            return MembershipVerdict(REACHABLE)
        return None
    # algebraic target: certified comparisons through enclosures
    prec = 128
    encs = [x.enclosure(prec) if isinstance(x, AlgReal)
            else DyInterval.from_fraction(x) for x in span]
    for c, u in pair.outer:
        acc = DyInterval.exact(0)
        for ci, e in zip(c, encs):
            acc = acc + e * DyInterval.from_fraction(ci)
        if acc.lo > u:
            return MembershipVerdict(NOT_REACHABLE, witness=(tuple(c), u),
                                     detail="separating halfspace")
    if pair.dim == 2 and len(pair.inner) >= 3:
        hps = g2.polygon_halfplanes(pair.inner)
        inside = True
        for a, b, cc in hps:
            acc = encs[0] * DyInterval.from_fraction(a) + encs[1] * DyInterval.from_fraction(b)
            if not acc.hi < cc:
                inside = False
                break
        if inside:
            return MembershipVerdict(REACHABLE)
    return None
