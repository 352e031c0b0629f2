"""Exact rational geometry for convex polygons in the plane.

Points are (Fraction, Fraction); halfplanes are (a, b, c) meaning
a x + b y <= c.  Everything except the final square roots (which round
outward through DyInterval) is exact, so containment predicates are
decisions, not approximations.
"""

from __future__ import annotations

from fractions import Fraction

from .dyadic import DyInterval


def cross(o, p, q) -> Fraction:
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def convex_hull(points):
    """Monotone chain; returns CCW vertices without repeats."""
    pts = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def clip_polygon(poly, halfplane):
    """Sutherland-Hodgman clip of a convex CCW polygon by a x + b y <= c."""
    a, b, c = halfplane
    if not poly:
        return []
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    # dedupe consecutive repeats
    ded = []
    for p in out:
        if not ded or ded[-1] != p:
            ded.append(p)
    if len(ded) > 1 and ded[0] == ded[-1]:
        ded.pop()
    return ded


def halfplane_polygon(halfplanes, bound: Fraction):
    """Vertices of the intersection, clipped inside [-bound, bound]^2."""
    m = Fraction(bound)
    poly = [(-m, -m), (m, -m), (m, m), (-m, m)]
    for hp in halfplanes:
        poly = clip_polygon(poly, hp)
        if not poly:
            return []
    return poly


def point_in_halfplanes(point, halfplanes, strict=False) -> bool:
    x, y = Fraction(point[0]), Fraction(point[1])
    for a, b, c in halfplanes:
        v = a * x + b * y
        if strict:
            if not v < c:
                return False
        elif v > c:
            return False
    return True


def polygon_halfplanes(poly):
    """Edge halfplanes of a CCW convex polygon."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        a = q[1] - p[1]
        b = p[0] - q[0]
        c = a * p[0] + b * p[1]
        out.append((a, b, c))
    return out


def point_in_polygon(point, poly, strict=False) -> bool:
    if len(poly) == 0:
        return False
    if len(poly) == 1:
        return (not strict) and (Fraction(point[0]), Fraction(point[1])) == poly[0]
    if len(poly) == 2:
        if strict:
            return False
        p, q = poly
        x = (Fraction(point[0]), Fraction(point[1]))
        if cross(p, q, x) != 0:
            return False
        lo0, hi0 = sorted((p[0], q[0]))
        lo1, hi1 = sorted((p[1], q[1]))
        return lo0 <= x[0] <= hi0 and lo1 <= x[1] <= hi1
    return point_in_halfplanes(point, polygon_halfplanes(poly), strict)


def erode_polygon(poly, r2_sq: Fraction):
    """Shrink a convex CCW polygon by the ball of squared radius r2_sq.

    Each edge halfplane moves inward by an upper bound of
    sqrt(r2_sq * (a^2 + b^2)); sound for certifying membership in the
    erosion of the true polygon.
    """
    if len(poly) < 3:
        return []
    hps = []
    big = Fraction(1)
    for a, b, c in polygon_halfplanes(poly):
        shift_sq = r2_sq * (a * a + b * b)
        shift = DyInterval.from_fraction(shift_sq, 96).sqrt().hi
        hps.append((a, b, c - shift))
        big = max(big, abs(c) + 1)
    return halfplane_polygon(hps, big)


def minkowski_sum(p1, p2):
    """Convex polygons (any vertex count >= 1): hull of pairwise sums."""
    if not p1 or not p2:
        return []
    sums = [(a[0] + b[0], a[1] + b[1]) for a in p1 for b in p2]
    return convex_hull(sums)


def dist2_point_segment(x, p, q) -> Fraction:
    """Exact squared distance from x to segment [p, q]."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    den = dx * dx + dy * dy
    if den == 0:
        ex, ey = x[0] - p[0], x[1] - p[1]
        return ex * ex + ey * ey
    t = ((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / den
    t = min(max(t, Fraction(0)), Fraction(1))
    cx, cy = p[0] + t * dx - x[0], p[1] + t * dy - x[1]
    return cx * cx + cy * cy


def dist2_point_polygon(x, poly) -> Fraction:
    """Exact squared distance to a convex polygon (0 if inside)."""
    if not poly:
        raise ValueError("empty polygon")
    if len(poly) == 1:
        return dist2_point_segment(x, poly[0], poly[0])
    if len(poly) > 2 and point_in_polygon(x, poly):
        return Fraction(0)
    best = None
    k = len(poly)
    for i in range(k):
        d = dist2_point_segment(x, poly[i], poly[(i + 1) % k])
        if best is None or d < best:
            best = d
    return best


def hausdorff_upper(inner_poly, outer_poly) -> Fraction:
    """Upper bound on d_H for inner ⊆ outer: max over outer vertices."""
    if not outer_poly:
        return Fraction(0)
    if not inner_poly:
        raise ValueError("inner polygon empty")
    worst = Fraction(0)
    for v in outer_poly:
        worst = max(worst, dist2_point_polygon(v, inner_poly))
    return DyInterval.from_fraction(worst, 96).sqrt().hi
