"""Exact linear algebra over the rationals.

Matrices are tuples of tuples of ``Fraction``; vectors are tuples.
Everything here is division-exact, no rounding anywhere: ranks,
kernels and characteristic polynomials feed the certified deciders.
"""

from __future__ import annotations

from fractions import Fraction

Mat = tuple
Vec = tuple


def mat(rows) -> Mat:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def vec(entries) -> Vec:
    return tuple(Fraction(x) for x in entries)


def dims(a: Mat):
    return len(a), len(a[0]) if a else 0


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(n: int, m: int) -> Mat:
    return tuple((Fraction(0),) * m for _ in range(n))


def transpose(a: Mat) -> Mat:
    return tuple(zip(*a)) and tuple(tuple(col) for col in zip(*a))


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Mat, s) -> Mat:
    s = Fraction(s)
    return tuple(tuple(x * s for x in row) for row in a)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec_q(a: Mat, v: Vec) -> Vec:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_dot_q(u: Vec, v: Vec) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def vec_add_q(u: Vec, v: Vec) -> Vec:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub_q(u: Vec, v: Vec) -> Vec:
    return tuple(x - y for x, y in zip(u, v))


def vec_scale_q(u: Vec, s) -> Vec:
    s = Fraction(s)
    return tuple(x * s for x in u)


def trace(a: Mat) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def _eliminate(rows):
    """In-place fraction Gauss elimination; returns (rref rows, pivot cols)."""
    rows = [list(r) for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rank(a: Mat) -> int:
    if not a:
        return 0
    _, pivots = _eliminate(a)
    return len(pivots)


def rref(a: Mat):
    rows, pivots = _eliminate(a)
    return tuple(tuple(r) for r in rows), tuple(pivots)


def solve(a: Mat, b: Vec) -> Vec:
    """Unique solution of a square nonsingular system; raises on singular."""
    n = len(a)
    aug = [list(a[i]) + [Fraction(b[i])] for i in range(n)]
    rows, pivots = _eliminate(aug)
    if len(pivots) != n or any(p >= n for p in pivots):
        raise ValueError("singular system")
    return tuple(rows[i][n] for i in range(n))


def inverse(a: Mat) -> Mat:
    n = len(a)
    aug = [list(a[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rows, pivots = _eliminate(aug)
    if len(pivots) != n or any(p >= n for p in pivots):
        raise ValueError("singular matrix")
    return tuple(tuple(rows[i][n:]) for i in range(n))


def nullspace(a: Mat):
    """Basis of the right kernel as a list of vectors."""
    n, m = dims(a)
    if m == 0:
        return []
    rows, pivots = _eliminate(a)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * m
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][fc]
        basis.append(tuple(v))
    return basis


def column_space_basis(a: Mat):
    """Indices and vectors of a maximal independent column set."""
    _, pivots = _eliminate(a)
    cols = transpose(a)
    return list(pivots), [cols[c] for c in pivots]


def extend_to_basis(vectors, n: int) -> Mat:
    """Extend independent n-vectors to a full basis using standard vectors.

    Returns the basis as a matrix whose COLUMNS are the basis vectors,
    the given ones first.
    """
    cols = [vec(v) for v in vectors]
    for j in range(n):
        e = tuple(Fraction(int(i == j)) for i in range(n))
        trial = cols + [e]
        if rank(tuple(zip(*trial))) == len(trial):
            cols.append(e)
        if len(cols) == n:
            break
    if len(cols) != n:
        raise ValueError("could not extend to a basis")
    return tuple(tuple(c[i] for c in cols) for i in range(n))


def mat_pow(a: Mat, k: int) -> Mat:
    n = len(a)
    acc = identity(n)
    base = a
    while k:
        if k & 1:
            acc = mat_mul(acc, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return acc


def charpoly(a: Mat) -> tuple:
    """Coefficients (c_0, ..., c_n) of det(xI - A), low degree first.

    Faddeev-LeVerrier; exact over Fraction.
    """
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = identity(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        c = -trace(am) / k
        coeffs[n - k] = c
        m = tuple(
            tuple(am[i][j] + (c if i == j else 0) for j in range(n))
            for i in range(n)
        )
    return tuple(coeffs)


def krylov(a: Mat, b: Vec) -> Mat:
    """Columns b, Ab, ..., A^(n-1) b as a single n x n matrix."""
    n = len(a)
    cols = [vec(b)]
    for _ in range(n - 1):
        cols.append(mat_vec_q(a, cols[-1]))
    return tuple(tuple(c[i] for c in cols) for i in range(n))


def controllability_rank(a: Mat, b_cols: Mat) -> int:
    """Rank of [B, AB, ..., A^(n-1)B] for B given as a matrix."""
    n = len(a)
    blocks = []
    cur = b_cols
    for _ in range(n):
        blocks.append(cur)
        cur = mat_mul(a, cur)
    rows = tuple(
        tuple(x for blk in blocks for x in blk[i]) for i in range(n)
    )
    return rank(rows)


def poly_eval_q(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_mul_q(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return tuple(out)


def poly_deriv_q(p):
    return tuple(Fraction(k) * p[k] for k in range(1, len(p)))


def apply_poly(a: Mat, coeffs) -> Mat:
    """coeffs[k] x^k evaluated at the matrix (Horner)."""
    n = len(a)
    acc = zeros(n, n)
    for c in reversed(coeffs):
        acc = mat_mul(acc, a)
        acc = tuple(
            tuple(acc[i][j] + (c if i == j else 0) for j in range(n))
            for i in range(n)
        )
    return acc
