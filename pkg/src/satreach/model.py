"""Problem representation, validation, classification, serialization.

Problems are x' = Ax + Bu with exact entries: rationals parse from
"p/q" strings (or plain integers) and real algebraic numbers from
{"minpoly": [...], "interval": [lo, hi]} objects; floating-point
literals are rejected so that parse / serialize round trips are lossless
and safe to feed the exact deciders.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from . import qlinalg as ql
from .algnum import (
    AlgReal,
    SpectralStructure,
    alg_compare,
    eigen_structure,
    spectral_structure_of_algebraic_diagonal,
)


class ProblemFormatError(ValueError):
    def __init__(self, message, path="$"):
        super().__init__("%s (at %s)" % (message, path))
        self.path = path


# -- input sets, horizons, targets ------------------------------------------


@dataclass(frozen=True)
class Hypercube:
    """U = [-1, 1]^m."""


@dataclass(frozen=True)
class Singleton:
    value: tuple  # rational vector


@dataclass(frozen=True)
class ZeroInput:
    pass


@dataclass(frozen=True)
class Infinite:
    pass


@dataclass(frozen=True)
class Bounded:
    tau: object  # AlgReal >= 0


@dataclass(frozen=True)
class PointTarget:
    point: tuple


@dataclass(frozen=True)
class HyperplaneTarget:
    c: tuple
    d: object


@dataclass(frozen=True)
class HalfspaceTarget:
    c: tuple
    d: object


@dataclass(frozen=True)
class BoxedHyperplaneTarget:
    c: tuple
    d: object
    m: object  # box radius


@dataclass
class ReachProblem:
    a: tuple          # n x n rows; entries Fraction or AlgReal
    b: tuple          # n x m rows
    input_set: object
    horizon: object
    target: object

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def m(self) -> int:
        return len(self.b[0]) if self.b and self.b[0] else 0

    @property
    def rational(self) -> bool:
        return all(isinstance(x, Fraction) for row in self.a for x in row) and all(
            isinstance(x, Fraction) for row in self.b for x in row
        )

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.b)

    def validate(self):
        n = len(self.a)
        if n == 0:
            raise ProblemFormatError("empty matrix", "$.A")
        for i, row in enumerate(self.a):
            if len(row) != n:
                raise ProblemFormatError("A is not square", "$.A[%d]" % i)
        if len(self.b) != n:
            raise ProblemFormatError("B must have %d rows" % n, "$.B")
        m = len(self.b[0])
        if m == 0:
            raise ProblemFormatError("B has no columns", "$.B")
        for i, row in enumerate(self.b):
            if len(row) != m:
                raise ProblemFormatError("ragged control matrix", "$.B[%d]" % i)
        if isinstance(self.input_set, Singleton) and len(self.input_set.value) != m:
            raise ProblemFormatError("singleton input has wrong dimension",
                                     "$.input_set")
        if isinstance(self.horizon, Bounded) and self.horizon.tau.sign() < 0:
            raise ProblemFormatError("tau must be >= 0", "$.horizon")
        tgt = self.target
        if isinstance(tgt, PointTarget) and len(tgt.point) != n:
            raise ProblemFormatError("target point dimension mismatch", "$.target")
        for t in (HyperplaneTarget, HalfspaceTarget, BoxedHyperplaneTarget):
            if isinstance(tgt, t) and len(tgt.c) != n:
                raise ProblemFormatError("target normal dimension mismatch",
                                         "$.target")
        return self


# -- scalar (de)serialization -------------------------------------------------


def _parse_scalar(v, path):
    if isinstance(v, bool):
        raise ProblemFormatError("booleans are not numbers", path)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ProblemFormatError("bad rational literal %r" % v, path)
    if isinstance(v, dict) and set(v) == {"minpoly", "interval"}:
        coeffs = v["minpoly"]
        if not isinstance(coeffs, list) or not all(isinstance(c, int) for c in coeffs):
            raise ProblemFormatError("minpoly must be a list of integers", path)
        iv = v["interval"]
        if not isinstance(iv, list) or len(iv) != 2:
            raise ProblemFormatError("interval must be [lo, hi]", path)
        lo = _parse_scalar(iv[0], path + ".interval[0]")
        hi = _parse_scalar(iv[1], path + ".interval[1]")
        if not isinstance(lo, Fraction) or not isinstance(hi, Fraction):
            raise ProblemFormatError("interval endpoints must be rational", path)
        try:
            return AlgReal.from_root(coeffs, lo, hi)
        except ValueError as e:
            raise ProblemFormatError(str(e), path)
    raise ProblemFormatError("expected a rational string or algebraic object", path)


def _dump_scalar(v):
    if isinstance(v, AlgReal):
        if v.is_rational:
            v = v.to_fraction()
        else:
            lo, hi = v.isolator()
            return {
                "minpoly": [int(c) for c in v.minpoly_coeffs()],
                "interval": [_dump_scalar(lo), _dump_scalar(hi)],
            }
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else "%d/%d" % (
        f.numerator, f.denominator)


def _parse_vector(v, path, allow_algebraic=True):
    if not isinstance(v, list) or not v:
        raise ProblemFormatError("expected a nonempty array", path)
    out = []
    for i, x in enumerate(v):
        s = _parse_scalar(x, "%s[%d]" % (path, i))
        if not allow_algebraic and isinstance(s, AlgReal):
            raise ProblemFormatError("algebraic entry not allowed here",
                                     "%s[%d]" % (path, i))
        out.append(s)
    return tuple(out)


def _parse_matrix(v, path):
    if not isinstance(v, list) or not v:
        raise ProblemFormatError("expected a nonempty matrix", path)
    return tuple(_parse_vector(row, "%s[%d]" % (path, i)) for i, row in enumerate(v))


def _reject_float(s):
    raise ProblemFormatError(
        "floating-point literal %r rejected; use rational strings" % s)


def parse_problem(text: str) -> ReachProblem:
    """Parse the JSON problem document, reconstructing values bit-exactly."""
    try:
        doc = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as e:
        raise ProblemFormatError("invalid JSON: %s" % e)
    if not isinstance(doc, dict):
        raise ProblemFormatError("document must be an object")
    for key in ("A", "B", "input_set", "horizon", "target"):
        if key not in doc:
            raise ProblemFormatError("missing field %r" % key)
    a = _parse_matrix(doc["A"], "$.A")
    b = _parse_matrix(doc["B"], "$.B")

    raw_in = doc["input_set"]
    if raw_in == "hypercube":
        input_set = Hypercube()
    elif raw_in == "zero":
        input_set = ZeroInput()
    elif isinstance(raw_in, dict) and set(raw_in) == {"singleton"}:
        input_set = Singleton(_parse_vector(raw_in["singleton"],
                                            "$.input_set.singleton",
                                            allow_algebraic=False))
    else:
        raise ProblemFormatError("unknown input set %r" % raw_in, "$.input_set")

    raw_h = doc["horizon"]
    if raw_h == "inf":
        horizon = Infinite()
    elif isinstance(raw_h, dict) and set(raw_h) == {"tau"}:
        tau = _parse_scalar(raw_h["tau"], "$.horizon.tau")
        horizon = Bounded(tau if isinstance(tau, AlgReal) else AlgReal(tau))
    else:
        raise ProblemFormatError("unknown horizon %r" % raw_h, "$.horizon")

    raw_t = doc["target"]
    if not isinstance(raw_t, dict) or len(raw_t) != 1:
        raise ProblemFormatError("target must be a single-key object", "$.target")
    kind, body = next(iter(raw_t.items()))
    if kind == "point":
        target = PointTarget(_parse_vector(body, "$.target.point"))
    elif kind in ("hyperplane", "halfspace", "boxed_hyperplane"):
        if not isinstance(body, dict):
            raise ProblemFormatError("target body must be an object", "$.target")
        c = _parse_vector(body.get("c"), "$.target.c")
        d = _parse_scalar(body.get("d"), "$.target.d")
        if kind == "hyperplane":
            target = HyperplaneTarget(c, d)
        elif kind == "halfspace":
            target = HalfspaceTarget(c, d)
        else:
            target = BoxedHyperplaneTarget(c, d,
                                           _parse_scalar(body.get("M"), "$.target.M"))
    else:
        raise ProblemFormatError("unknown target kind %r" % kind, "$.target")

    return ReachProblem(a, b, input_set, horizon, target).validate()


def serialize_problem(p: ReachProblem) -> str:
    doc = {
        "A": [[_dump_scalar(x) for x in row] for row in p.a],
        "B": [[_dump_scalar(x) for x in row] for row in p.b],
    }
    if isinstance(p.input_set, Hypercube):
        doc["input_set"] = "hypercube"
    elif isinstance(p.input_set, ZeroInput):
        doc["input_set"] = "zero"
    else:
        doc["input_set"] = {"singleton": [_dump_scalar(x) for x in p.input_set.value]}
    if isinstance(p.horizon, Infinite):
        doc["horizon"] = "inf"
    else:
        doc["horizon"] = {"tau": _dump_scalar(p.horizon.tau)}
    t = p.target
    if isinstance(t, PointTarget):
        doc["target"] = {"point": [_dump_scalar(x) for x in t.point]}
    elif isinstance(t, HyperplaneTarget):
        doc["target"] = {"hyperplane": {"c": [_dump_scalar(x) for x in t.c],
                                        "d": _dump_scalar(t.d)}}
    elif isinstance(t, HalfspaceTarget):
        doc["target"] = {"halfspace": {"c": [_dump_scalar(x) for x in t.c],
                                       "d": _dump_scalar(t.d)}}
    else:
        doc["target"] = {"boxed_hyperplane": {"c": [_dump_scalar(x) for x in t.c],
                                              "d": _dump_scalar(t.d),
                                              "M": _dump_scalar(t.m)}}
    return json.dumps(doc, indent=2, sort_keys=True)


# -- classification -----------------------------------------------------------

TAG_RATIONAL_MULTIPLE = "RationalMultipleSpectrum"
TAG_TWO_ENTRIES = "TwoNonzeroEntries"
TAG_SINGLE_REAL = "SingleRealEigenvalue"
TAG_REAL_SPECTRUM = "RealSpectrum"
TAG_PLANAR = "Planar"
TAG_PLANAR_COMPLEX = "PlanarComplex"


@dataclass
class ProblemClassification:
    spectral: SpectralStructure
    column_ranks: tuple
    controllable: bool
    tags: frozenset

    def has(self, tag: str) -> bool:
        return tag in self.tags


def _is_diagonal(a) -> bool:
    return all(_scalar_is_zero(a[i][j]) for i in range(len(a))
               for j in range(len(a)) if i != j)


def _scalar_is_zero(x) -> bool:
    if isinstance(x, AlgReal):
        return x.sign() == 0
    return x == 0


def spectral_of(p: ReachProblem) -> SpectralStructure:
    if p.rational:
        return eigen_structure(p.a)
    if _is_diagonal(p.a):
        return spectral_structure_of_algebraic_diagonal(
            [p.a[i][i] for i in range(p.n)])
    raise ProblemFormatError(
        "algebraic entries are supported only for diagonal matrices", "$.A")


def _column_rank(p: ReachProblem, j: int) -> int:
    col = p.column(j)
    if p.rational and all(isinstance(x, Fraction) for x in col):
        return ql.rank(ql.krylov(ql.mat(p.a), ql.vec(col)))
    mat = sympy.Matrix([[_to_sym(x) for x in row] for row in p.a])
    vec = sympy.Matrix([_to_sym(x) for x in col])
    cols = [vec]
    for _ in range(p.n - 1):
        cols.append(mat * cols[-1])
    return sympy.Matrix.hstack(*cols).rank()


def _to_sym(x):
    if isinstance(x, AlgReal):
        return x.expr
    return sympy.Rational(x.numerator, x.denominator)


def _full_rank(p: ReachProblem) -> bool:
    if p.rational:
        return ql.controllability_rank(ql.mat(p.a), ql.mat(p.b)) == p.n
    mat = sympy.Matrix([[_to_sym(x) for x in row] for row in p.a])
    bmat = sympy.Matrix([[_to_sym(x) for x in row] for row in p.b])
    blocks = [bmat]
    for _ in range(p.n - 1):
        blocks.append(mat * blocks[-1])
    return sympy.Matrix.hstack(*blocks).rank() == p.n


def _rational_multiple_spectrum(spec: SpectralStructure) -> bool:
    """Diagonalisable with all eigenvalues rational multiples of one number."""
    if not spec.real_spectrum:
        return False
    if any(e.max_block > 1 for e in spec.eigenvalues):
        return False
    nonzero = [e.re for e in spec.eigenvalues if e.re.sign() != 0]
    if not nonzero:
        return True
    base = nonzero[0]
    for other in nonzero[1:]:
        if not (other / base).is_rational:
            return False
    return True


def classify(p: ReachProblem) -> ProblemClassification:
    """Exact controllability ranks, spectral flags and subclass tags."""
    spec = spectral_of(p)
    ranks = tuple(_column_rank(p, j) for j in range(p.m))
    controllable = _full_rank(p)
    tags = set()
    if spec.real_spectrum:
        tags.add(TAG_REAL_SPECTRUM)
    if p.n == 2:
        tags.add(TAG_PLANAR)
        if not spec.real_spectrum:
            tags.add(TAG_PLANAR_COMPLEX)
    if _rational_multiple_spectrum(spec):
        tags.add(TAG_RATIONAL_MULTIPLE)
    if len(spec.eigenvalues) == 1 and spec.eigenvalues[0].is_real and p.m == 1:
        tags.add(TAG_SINGLE_REAL)
    if p.m == 1 and _is_diagonal(p.a):
        nonzero = sum(1 for x in p.column(0) if not _scalar_is_zero(x))
        if nonzero <= 2:
            tags.add(TAG_TWO_ENTRIES)
    return ProblemClassification(spec, ranks, controllable, frozenset(tags))
