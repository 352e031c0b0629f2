"""Reduction to controllable single-input stable parts plus a free factor.

A hypercube-input problem splits per column of B into independent
single-input reachable sets (Minkowski sum); each column is then
restricted to its Krylov subspace (making the pair controllable) and,
for infinite horizons, split into a stable block and a weakly-antistable
block.  Controllable weakly-antistable blocks reach their whole
subspace, so they contribute free directions instead of a part.

All transformations here are exact: rational bases from kernel and
Krylov computations, or grouped eigenvalue masks for (possibly
algebraic) diagonal matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import qlinalg as ql
from .algnum import (
    AlgReal,
    SpectralStructure,
    alg_compare,
    eigen_structure,
    spectral_structure_of_algebraic_diagonal,
)
from .model import Bounded, Hypercube, Infinite, ReachProblem


class UnsupportedCaseError(ValueError):
    pass


class ZeroColumnError(ValueError):
    pass


@dataclass
class PlanPart:
    a: tuple                 # k x k rows, Fraction or AlgReal (diag) entries
    b: tuple                 # k-vector
    embed: tuple             # n x k rational/algebraic matrix into ambient space
    spectral: SpectralStructure
    source_column: int
    provenance: tuple

    @property
    def k(self) -> int:
        return len(self.a)

    def project_direction(self, c) -> tuple:
        """Map an ambient direction to part coordinates: embed^T c."""
        return tuple(
            _dot(tuple(row[j] for row in self.embed), c)
            for j in range(self.k)
        )


def _dot(u, v):
    acc = None
    for x, y in zip(u, v):
        term = x * y
        acc = term if acc is None else acc + term
    return acc


@dataclass
class DecompositionPlan:
    n: int
    horizon: object
    parts: list
    free_basis: tuple          # tuple of ambient n-vectors (may be empty)
    provenance: tuple

    @property
    def free_dims(self) -> int:
        return len(self.free_basis)


def controllability_matrix(a_rows, b_vec):
    """[b, Ab, ..., A^(n-1) b] together with its exact rank."""
    a = ql.mat(a_rows)
    b = ql.vec(b_vec)
    k = ql.krylov(a, b)
    return k, ql.rank(k)


def is_controllable(a_rows, b_vec) -> bool:
    _, r = controllability_matrix(a_rows, b_vec)
    return r == len(a_rows)


@dataclass
class Restriction:
    a_v: tuple
    b_v: tuple
    embed: tuple          # n x k: columns are the ambient basis of V
    basis: tuple          # full n x n change of basis (V first)


def controllable_restriction(a_rows, b_vec) -> Restriction:
    """Restrict (A, b) to V = span(b, Ab, ..., A^(n-1) b).

    Returns (A_V, b_V) with (A_V, b_V) controllable, the n x k embedding
    of V into ambient coordinates and the full basis matrix; the spectrum
    of A_V divides that of A.
    """
    a = ql.mat(a_rows)
    b = ql.vec(b_vec)
    n = len(a)
    if all(x == 0 for x in b):
        raise ZeroColumnError("b = 0 spans nothing")
    kry = ql.krylov(a, b)
    idx, cols = ql.column_space_basis(kry)
    k = len(cols)
    basis = ql.extend_to_basis(cols, n)
    inv = ql.inverse(basis)
    a_t = ql.mat_mul(inv, ql.mat_mul(a, basis))
    b_t = ql.mat_vec_q(inv, b)
    for i in range(k, n):
        for j in range(k):
            assert a_t[i][j] == 0, "restriction basis not invariant"
        assert b_t[i] == 0
    a_v = tuple(tuple(a_t[i][j] for j in range(k)) for i in range(k))
    b_v = tuple(b_t[:k])
    embed = tuple(tuple(basis[i][j] for j in range(k)) for i in range(n))
    return Restriction(a_v, b_v, embed, basis)


@dataclass
class StabilitySplit:
    a_stable: tuple
    b_stable: tuple                # rows of the transformed B in the stable block
    n_antistable: int
    basis: tuple                   # columns: stable basis then antistable basis
    stable_dim: int
    reaches_everything: bool       # weakly-antistable and controllable


def stability_split(a_rows, b_cols) -> StabilitySplit:
    """Exact invariant-subspace split by the sign of eigenvalue real parts.

    The characteristic polynomial factors over Q into a product with all
    roots Re < 0 and the rest; the corresponding primary components give
    rational bases.  An irreducible factor whose roots straddle the
    imaginary axis would force an algebraic basis, which this
    implementation does not carry (UnsupportedCaseError).
    """
    a = ql.mat(a_rows)
    b = ql.mat(b_cols)
    n = len(a)
    spec = eigen_structure(a)
    if spec.stable:
        return StabilitySplit(a, b, 0, ql.identity(n), n,
                              reaches_everything=False)
    if spec.weakly_antistable:
        everything = ql.controllability_rank(a, b) == n
        return StabilitySplit((), (), n, ql.identity(n), 0,
                              reaches_everything=everything)
    stable_poly = [Fraction(1)]
    anti_poly = [Fraction(1)]
    seen = set()
    for eig in spec.eigenvalues:
        if eig.factor in seen:
            continue
        seen.add(eig.factor)
        roots = [e for e in spec.eigenvalues if e.factor == eig.factor]
        signs = {_re_sign_of(e) for e in roots}
        coeffs = [Fraction(c) for c in eig.factor]
        mult = eig.multiplicity
        if signs <= {-1}:
            for _ in range(mult):
                stable_poly = ql.poly_mul_q(stable_poly, coeffs)
        elif signs <= {0, 1}:
            for _ in range(mult):
                anti_poly = ql.poly_mul_q(anti_poly, coeffs)
        else:
            raise UnsupportedCaseError(
                "irreducible factor mixes stable and antistable roots; "
                "algebraic split bases are not carried")
    # primary decomposition: ker q_s(A) is exactly the stable component
    stable_basis = ql.nullspace(ql.apply_poly(a, stable_poly))
    anti_basis = ql.nullspace(ql.apply_poly(a, anti_poly))
    k1, k2 = len(stable_basis), len(anti_basis)
    assert k1 + k2 == n
    basis = tuple(
        tuple((stable_basis + anti_basis)[j][i] for j in range(n)) for i in range(n)
    )
    inv = ql.inverse(basis)
    a_t = ql.mat_mul(inv, ql.mat_mul(a, basis))
    b_t = ql.mat_mul(inv, b)
    for i in range(k1):
        for j in range(k1, n):
            assert a_t[i][j] == 0 and a_t[j][i] == 0, "split not invariant"
    a1 = tuple(tuple(a_t[i][j] for j in range(k1)) for i in range(k1))
    b1 = tuple(tuple(b_t[i][j] for j in range(len(b[0]))) for i in range(k1))
    return StabilitySplit(a1, b1, k2, basis, k1, reaches_everything=False)


def _re_sign_of(eig) -> int:
    if eig.is_real:
        return eig.re.sign()
    s = eig.re.enclosure(128).sign()
    if s:
        return s
    return eig.re.sign()


def _is_diag(a) -> bool:
    n = len(a)
    return all(_zero(a[i][j]) for i in range(n) for j in range(n) if i != j)


def _zero(x) -> bool:
    return x.sign() == 0 if isinstance(x, AlgReal) else x == 0


def _diag_column_parts(a, col, j, horizon_inf):
    """Per-column reduction for (possibly algebraic) diagonal matrices.

    Groups equal diagonal entries; each group with a nonzero b-mass
    yields one coordinate of the restricted pair.
    """
    n = len(a)
    entries = [a[i][i] for i in range(n)]
    groups = []
    for i in range(n):
        if _zero(col[i]):
            continue
        for g in groups:
            if _alg_eq(entries[g[0][0]], entries[i]):
                g.append((i,))
                break
        else:
            groups.append([(i,)])
    if not groups:
        return None, []
    diag_vals = []
    embed_cols = []
    bv = []
    for g in groups:
        idxs = [i for (i,) in g]
        diag_vals.append(entries[idxs[0]])
        v = [Fraction(0)] * n
        for i in idxs:
            v[i] = col[i]
        embed_cols.append(tuple(v))
        bv.append(Fraction(1))
    stable_idx = [i for i, d in enumerate(diag_vals) if _sign_of(d) < 0]
    free_idx = [i for i, d in enumerate(diag_vals) if _sign_of(d) >= 0]
    part = None
    frees = []
    if horizon_inf:
        if stable_idx:
            a_v = tuple(
                tuple(diag_vals[i] if i == jdx else Fraction(0) for jdx in stable_idx)
                for i in stable_idx
            )
            emb = tuple(tuple(embed_cols[jdx][row] for jdx in stable_idx)
                        for row in range(n))
            part = (a_v, tuple(Fraction(1) for _ in stable_idx), emb)
        frees = [embed_cols[i] for i in free_idx]
    else:
        a_v = tuple(
            tuple(diag_vals[i] if i == jdx else Fraction(0)
                  for jdx in range(len(diag_vals)))
            for i in range(len(diag_vals))
        )
        emb = tuple(tuple(embed_cols[jdx][row] for jdx in range(len(diag_vals)))
                    for row in range(n))
        part = (a_v, tuple(bv), emb)
    return part, frees


def _alg_eq(x, y) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x == y
    return alg_compare(AlgReal(x), AlgReal(y)) == 0


def _sign_of(x) -> int:
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    return x.sign()


def build_plan(problem: ReachProblem) -> DecompositionPlan:
    """Decompose a hypercube-input problem into plan parts + free factor.

    Order: per-column split of B, then controllable restriction, then
    stability split inside each column (infinite horizons only; bounded
    horizons admit any spectrum and skip the split).
    """
    if not isinstance(problem.input_set, Hypercube):
        raise UnsupportedCaseError("plans are defined for hypercube inputs")
    horizon_inf = isinstance(problem.horizon, Infinite)
    n = problem.n
    parts = []
    free_cols = []
    notes = []
    diag = _is_diag(problem.a)
    if not problem.rational and not diag:
        raise UnsupportedCaseError(
            "algebraic entries are supported only for diagonal matrices")
    for j in range(problem.m):
        col = problem.column(j)
        if all(_zero(x) for x in col):
            notes.append("column %d: zero, dropped" % j)
            continue
        if diag:
            part, frees = _diag_column_parts(problem.a, col, j, horizon_inf)
            free_cols.extend(frees)
            if part is not None:
                a_v, b_v, emb = part
                spec = (
                    spectral_structure_of_algebraic_diagonal(
                        [a_v[i][i] for i in range(len(a_v))])
                    if not all(isinstance(a_v[i][i], Fraction) for i in range(len(a_v)))
                    else eigen_structure(a_v)
                )
                parts.append(PlanPart(a_v, b_v, emb, spec, j,
                                      ("diagonal restriction",)))
            continue
        restr = controllable_restriction(problem.a, col)
        prov = ["column %d: Krylov restriction to dim %d" % (j, len(restr.a_v))]
        if not horizon_inf:
            spec = eigen_structure(restr.a_v)
            parts.append(PlanPart(restr.a_v, restr.b_v, restr.embed, spec, j,
                                  tuple(prov)))
            continue
        split = stability_split(restr.a_v, tuple((x,) for x in restr.b_v))
        k = len(restr.a_v)
        if split.n_antistable == 0:
            spec = eigen_structure(restr.a_v)
            parts.append(PlanPart(restr.a_v, restr.b_v, restr.embed, spec, j,
                                  tuple(prov)))
            continue
        # free directions: image of the antistable basis under the embedding
        anti_cols = [tuple(split.basis[i][jj] for i in range(k))
                     for jj in range(split.stable_dim, k)]
        for v in anti_cols:
            free_cols.append(ql.mat_vec_q(restr.embed, v))
        prov.append("column %d: antistable block of dim %d absorbed into "
                    "free factor" % (j, split.n_antistable))
        if split.stable_dim:
            stable_cols = [tuple(split.basis[i][jj] for i in range(k))
                           for jj in range(split.stable_dim)]
            emb_part = tuple(
                tuple(_dot(tuple(restr.embed[row]), sc) for sc in stable_cols)
                for row in range(n)
            )
            b1 = tuple(split.b_stable[i][0] for i in range(split.stable_dim))
            spec = eigen_structure(split.a_stable)
            if not spec.stable:
                raise UnsupportedCaseError(
                    "stable block failed certification")
            parts.append(PlanPart(split.a_stable, b1, emb_part, spec, j,
                                  tuple(prov)))
        else:
            notes.append("column %d: fully antistable, free only" % j)
    free_basis = _independent(free_cols, n)
    for part in parts:
        if all(isinstance(x, Fraction) for x in part.b):
            if all(isinstance(v, Fraction) for row in part.a for v in row):
                assert is_controllable(part.a, part.b), "part not controllable"
    return DecompositionPlan(n, problem.horizon, parts, tuple(free_basis),
                             tuple(notes))


def _independent(cols, n):
    out = []
    for v in cols:
        if not out:
            if any(x != 0 for x in v):
                out.append(ql.vec(v))
            continue
        test = tuple(zip(*(out + [ql.vec(v)])))
        if ql.rank(test) == len(out) + 1:
            out.append(ql.vec(v))
    return out
