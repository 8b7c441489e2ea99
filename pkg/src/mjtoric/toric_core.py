"""Exact geometry of Delzant polytopes.

A polytope is given by facets ``{y : <u_i, y> + lambda_i >= 0}`` with
primitive inward normals ``u_i``.  All quantities are ``Fraction``; faces
are identified by the sorted tuple of facet indices that vanish on them,
which is also how faces of different polytopes over the same fan are
matched.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from fractions import Fraction
from itertools import combinations
from math import factorial, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from . import lattice
from .errors import (ChartFailure, DegenerateFace, DegreeOverflow, FanMismatch,
                     InvalidPolytope, NonSimpleVertex, NonUnimodularVertex,
                     NotFullDimensional, UnboundedPolytope)

Point = Tuple[Fraction, ...]
FaceKey = Tuple[int, ...]


@dataclass(frozen=True)
class Facet:
    normal: Tuple[int, ...]
    offset: Fraction

    def __post_init__(self):
        normal = tuple(int(x) for x in self.normal)
        if all(x == 0 for x in normal):
            raise ValueError("facet normal must be nonzero")
        if not lattice.primitive(normal):
            raise ValueError(f"facet normal {normal} is not primitive")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", lattice.to_fraction(self.offset))

    def value(self, y) -> Fraction:
        return sum((a * b for a, b in zip(self.normal, y)), Fraction(0)) + self.offset


@dataclass(frozen=True)
class VertexRecord:
    point: Point
    facets: FaceKey
    det: Optional[int]  # None when more than n facets meet


@dataclass
class ValidationReport:
    vertices: List[VertexRecord]
    valid: bool
    error: Optional[Exception] = None

    def raise_for_error(self):
        if self.error is not None:
            raise self.error

    def lines(self) -> List[str]:
        out = []
        for v in self.vertices:
            pt = ", ".join(str(c) for c in v.point)
            d = "n/a" if v.det is None else str(v.det)
            out.append(f"vertex ({pt})  facets {list(v.facets)}  det {d}")
        out.append("verdict: " + ("valid" if self.valid else f"invalid ({type(self.error).__name__}: {self.error})"))
        return out


@dataclass(frozen=True)
class Face:
    facets: FaceKey
    dim: int
    vertices: Tuple[Point, ...]

    @property
    def key(self) -> FaceKey:
        return self.facets


@dataclass(frozen=True)
class FaceChart:
    """Affine lattice chart ``y = base + basis @ z`` of a face."""

    base: Point
    basis: Tuple[Tuple[int, ...], ...]  # p vectors of length n (HNF rows)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def _gram(self):
        p = self.dim
        return [[Fraction(sum(a * b for a, b in zip(self.basis[i], self.basis[j]))) for j in range(p)]
                for i in range(p)]

    def forward(self, z) -> Point:
        n = len(self.base)
        return tuple(self.base[i] + sum((z[k] * self.basis[k][i] for k in range(self.dim)), Fraction(0))
                     for i in range(n))

    def backward(self, y) -> Point:
        # least squares is exact here since y - base lies in the span
        p = self.dim
        d = [Fraction(a) - b for a, b in zip(y, self.base)]
        rhs = [sum(a * b for a, b in zip(self.basis[i], d)) for i in range(p)]
        z = lattice.solve(self._gram, rhs)
        if self.forward(z) != tuple(Fraction(a) for a in y):
            raise ChartFailure(f"point {tuple(map(str, y))} is not on the chart's affine span")
        return tuple(z)


class DelzantPolytope:
    """H-representation with a lazily validated, cached face lattice.

    >>> simplex = DelzantPolytope.from_data([(1, 0), (0, 1), (-1, -1)], [0, 0, 1])
    >>> len(simplex.faces())
    7
    """

    def __init__(self, facets: Sequence[Facet], check: bool = True):
        if not facets:
            raise ValueError("need at least one facet")
        self.facets: Tuple[Facet, ...] = tuple(facets)
        self.n = len(self.facets[0].normal)
        if any(len(f.normal) != self.n for f in self.facets):
            raise ValueError("facet normals have inconsistent dimensions")
        self._report: Optional[ValidationReport] = None
        self._faces: Optional[Dict[FaceKey, Face]] = None
        self._by_dim: Dict[int, List[Face]] = {}
        self._triangulations: Dict[FaceKey, list] = {}
        if check:
            self.require_valid()

    @classmethod
    def from_data(cls, normals, offsets, check: bool = True) -> "DelzantPolytope":
        if len(normals) != len(offsets):
            raise ValueError("normals and offsets differ in length")
        return cls([Facet(tuple(u), lattice.to_fraction(o)) for u, o in zip(normals, offsets)], check=check)

    @property
    def normals(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(f.normal for f in self.facets)

    @property
    def offsets(self) -> Tuple[Fraction, ...]:
        return tuple(f.offset for f in self.facets)

    def with_offsets(self, offsets, check: bool = True) -> "DelzantPolytope":
        return DelzantPolytope.from_data(self.normals, offsets, check=check)

    def __repr__(self):
        offs = ", ".join(str(o) for o in self.offsets)
        return f"DelzantPolytope(n={self.n}, normals={list(self.normals)}, offsets=[{offs}])"

    # -- validation ---------------------------------------------------------

    @property
    def report(self) -> ValidationReport:
        if self._report is None:
            self._report = _validate(self)
        return self._report

    @property
    def is_valid(self) -> bool:
        return self.report.valid

    def require_valid(self):
        rep = self.report
        if not rep.valid:
            raise InvalidPolytope(f"not a valid Delzant polytope: {rep.error}", cause=rep.error)

    # -- faces ----------------------------------------------------------------

    @property
    def vertices(self) -> Tuple[Point, ...]:
        self.require_valid()
        return tuple(v.point for v in self.report.vertices)

    def _face_map(self) -> Dict[FaceKey, Face]:
        if self._faces is None:
            self.require_valid()
            verts = self.report.vertices
            keys = set()
            for v in verts:
                for k in range(self.n + 1):
                    keys.update(combinations(v.facets, k))
            faces = {}
            for key in keys:
                pts = tuple(v.point for v in verts if set(key) <= set(v.facets))
                faces[key] = Face(key, self.n - len(key), pts)
            self._faces = faces
        return self._faces

    def faces(self, dim: Optional[int] = None) -> List[Face]:
        if not self._by_dim:
            for f in sorted(self._face_map().values(), key=lambda f: (f.dim, f.facets)):
                self._by_dim.setdefault(f.dim, []).append(f)
        if dim is not None:
            return list(self._by_dim.get(dim, []))
        return [f for d in sorted(self._by_dim) for f in self._by_dim[d]]

    def face(self, key) -> Face:
        if isinstance(key, Face):
            key = key.facets
        key = tuple(sorted(key))
        try:
            return self._face_map()[key]
        except KeyError:
            raise KeyError(f"no face with facet set {list(key)}") from None

    @property
    def full_face(self) -> Face:
        return self.face(())

    def combinatorial_type(self) -> frozenset:
        return frozenset(v.facets for v in self.report.vertices)

    def facet_values(self, y) -> Tuple[Fraction, ...]:
        return tuple(f.value(y) for f in self.facets)


def _validate(poly: DelzantPolytope) -> ValidationReport:
    n, facets = poly.n, poly.facets
    normals = [f.normal for f in facets]

    if lattice.rank(normals) < n:
        return ValidationReport([], False, UnboundedPolytope("normals do not span R^n"))
    # extreme rays of the recession cone {d : U d >= 0}
    for sub in combinations(range(len(facets)), n - 1):
        rows = [normals[i] for i in sub]
        if n > 1 and lattice.rank(rows) < n - 1:
            continue
        ker = lattice.nullspace_rational(rows, n)
        if len(ker) != 1:
            continue
        # an integer multiple keeps the sign test exact and cheap
        scale = lcm(*(Fraction(x).denominator for x in ker[0]))
        d = [int(x * scale) for x in ker[0]]
        for sgn in (1, -1):
            if all(sgn * sum(a * b for a, b in zip(u, d)) >= 0 for u in normals):
                ray = tuple(sgn * x for x in d)
                return ValidationReport([], False, UnboundedPolytope(
                    f"recession direction {tuple(map(str, ray))}"))

    found: Dict[Point, VertexRecord] = {}
    for sub in combinations(range(len(facets)), n):
        rows = [normals[i] for i in sub]
        dt = lattice.det(rows)
        if dt == 0:
            continue
        y = tuple(lattice.solve(rows, [-facets[i].offset for i in sub]))
        if y in found:
            continue
        vals = [f.value(y) for f in facets]
        if any(v < 0 for v in vals):
            continue
        tight = tuple(i for i, v in enumerate(vals) if v == 0)
        det_t = int(lattice.det([normals[i] for i in tight])) if len(tight) == n else None
        found[y] = VertexRecord(y, tight, det_t)
    verts = sorted(found.values(), key=lambda v: v.facets)

    if not verts:
        return ValidationReport(verts, False, NotFullDimensional("empty polytope"))
    base = verts[0].point
    diffs = [[a - b for a, b in zip(v.point, base)] for v in verts[1:]]
    span = lattice.rank(diffs) if diffs else 0
    if span < n:
        return ValidationReport(verts, False, NotFullDimensional(
            f"vertices span an affine subspace of dimension {span} < {n}"))
    for v in verts:
        if len(v.facets) > n:
            return ValidationReport(verts, False, NonSimpleVertex(
                f"{len(v.facets)} facets {list(v.facets)} meet at vertex {tuple(map(str, v.point))}",
                vertex=v.point, facets=v.facets))
    for v in verts:
        if abs(v.det) != 1:
            return ValidationReport(verts, False, NonUnimodularVertex(
                f"facets {list(v.facets)} at vertex {tuple(map(str, v.point))} have det {v.det}",
                vertex=v.point, facets=v.facets, det=v.det))
    return ValidationReport(verts, True, None)


def validate_delzant(polytope: DelzantPolytope) -> ValidationReport:
    return polytope.report


def enumerate_faces(polytope: DelzantPolytope) -> List[Face]:
    """All nonempty faces, dimension 0 through n, ordered by (dim, facet set)."""
    return polytope.faces()


def face_chart(polytope: DelzantPolytope, face) -> FaceChart:
    face = polytope.face(face)
    if face.dim == 0:
        raise DegenerateFace("a vertex has no chart")
    rows = [polytope.facets[i].normal for i in face.facets]
    basis = lattice.integer_kernel(rows, polytope.n) if rows else \
        [[int(i == j) for j in range(polytope.n)] for i in range(polytope.n)]
    if len(basis) != face.dim:
        raise ChartFailure(f"direction lattice has rank {len(basis)}, face has dimension {face.dim}")
    return FaceChart(face.vertices[0], tuple(tuple(b) for b in basis))


def _simplices(polytope: DelzantPolytope, face: Face) -> List[Tuple[Point, ...]]:
    # cone from the first vertex over facets of the face that miss it
    if face.dim == 0:
        return [face.vertices]
    apex = face.vertices[0]
    out = []
    for sub in polytope.faces(face.dim - 1):
        if not set(face.facets) < set(sub.facets) or apex in sub.vertices:
            continue
        for simp in _simplices(polytope, sub):
            out.append((apex,) + simp)
    return out


def _chart_simplices(polytope, face):
    cached = polytope._triangulations.get(face.facets)
    if cached is not None:
        return cached
    chart = face_chart(polytope, face)
    p = chart.dim
    out = []
    coords = {v: chart.backward(v) for v in face.vertices}
    for simp in _simplices(polytope, face):
        z = [coords[pt] for pt in simp]
        m = [[z[k][i] - z[0][i] for i in range(p)] for k in range(1, p + 1)]
        vol = abs(lattice.det(m)) / factorial(p)
        out.append((simp, vol))
    polytope._triangulations[face.facets] = out
    return out


def lattice_volume(polytope: DelzantPolytope, face=()) -> Fraction:
    """Lattice-normalized p-volume (a lattice segment has length 1)."""
    face = polytope.face(face)
    if face.dim == 0:
        return Fraction(1)
    return sum((vol for _, vol in _chart_simplices(polytope, face)), Fraction(0))


def _affine(A):
    """Normalize ``A`` to ``(coeffs, const)``; accepts tuples or objects with ``.coeffs``/``.const``."""
    if hasattr(A, "coeffs") and hasattr(A, "const"):
        return [lattice.to_fraction(c) for c in A.coeffs], lattice.to_fraction(A.const)
    coeffs, const = A
    return [lattice.to_fraction(c) for c in coeffs], lattice.to_fraction(const)


def integrate_affine(polytope: DelzantPolytope, face, A) -> Fraction:
    """Exact lattice integral of an affine function ``y -> <coeffs, y> + const`` over a face."""
    coeffs, const = _affine(A)
    face = polytope.face(face)

    def ev(y):
        return sum((a * b for a, b in zip(coeffs, y)), Fraction(0)) + const

    if face.dim == 0:
        return ev(face.vertices[0])
    total = Fraction(0)
    for simp, vol in _chart_simplices(polytope, face):
        k = len(simp)
        centroid = tuple(sum((pt[i] for pt in simp), Fraction(0)) / k for i in range(polytope.n))
        total += vol * ev(centroid)
    return total


def barycenter(polytope: DelzantPolytope, face=()) -> Point:
    face = polytope.face(face)
    vol = lattice_volume(polytope, face)
    n = polytope.n
    return tuple(integrate_affine(polytope, face, ([int(i == j) for j in range(n)], 0)) / vol
                 for i in range(n))


# -- offset sums over a shared fan -----------------------------------------

def _normals_of(fan):
    if isinstance(fan, DelzantPolytope):
        return fan.normals
    return tuple(tuple(int(x) for x in u) for u in fan)


def summed_polytope(fan, lam_beta, lam_alpha, s) -> DelzantPolytope:
    """Polytope with offsets ``lam_beta + s * lam_alpha``; raises on a combinatorial change."""
    return _summed(_normals_of(fan),
                   tuple(lattice.to_fraction(x) for x in lam_beta),
                   tuple(lattice.to_fraction(x) for x in lam_alpha),
                   lattice.to_fraction(s))


@lru_cache(maxsize=512)
def _reference(normals, lb) -> DelzantPolytope:
    return DelzantPolytope.from_data(normals, lb, check=False)


@lru_cache(maxsize=512)
def _summed(normals, lb, la, s) -> DelzantPolytope:
    ref = _reference(normals, lb)
    ref.require_valid()
    poly = DelzantPolytope.from_data(normals, [b + s * a for b, a in zip(lb, la)], check=False)
    if not poly.is_valid:
        raise InvalidPolytope(f"offsets at s = {s} do not give a Delzant polytope: {poly.report.error}",
                              cause=poly.report.error)
    if poly.combinatorial_type() != ref.combinatorial_type():
        raise FanMismatch(f"offset sum at s = {s} changes the combinatorial type")
    return poly


def _key(face) -> FaceKey:
    if isinstance(face, Face):
        return face.facets
    return tuple(sorted(face))


def summed_face_volume(fan, lam_beta, lam_alpha, face, s) -> Fraction:
    poly = summed_polytope(fan, lam_beta, lam_alpha, s)
    return lattice_volume(poly, _key(face))


def _lagrange_derivative_at_zero(nodes, values) -> Fraction:
    # d/ds of the interpolating polynomial, evaluated at s = 0
    total = Fraction(0)
    for j, (sj, vj) in enumerate(zip(nodes, values)):
        others = [sk for k, sk in enumerate(nodes) if k != j]
        denom = Fraction(1)
        for sk in others:
            denom *= sj - sk
        # derivative at 0 of prod (s - sk)
        deriv = Fraction(0)
        for i in range(len(others)):
            term = Fraction(1)
            for k, sk in enumerate(others):
                if k != i:
                    term *= -sk
            deriv += term
        total += vj * deriv / denom
    return total


def _lagrange_eval(nodes, values, s) -> Fraction:
    total = Fraction(0)
    for j, (sj, vj) in enumerate(zip(nodes, values)):
        term = Fraction(vj)
        for k, sk in enumerate(nodes):
            if k != j:
                term *= (s - sk) / (sj - sk)
        total += term
    return total


def mixed_first_derivative(fan, lam_beta, lam_alpha, face) -> Fraction:
    """``d/ds Vol_L(F(lam_beta + s lam_alpha))`` at ``s = 0`` by exact interpolation."""
    key = _key(face)
    base = summed_polytope(fan, lam_beta, lam_alpha, 0)
    p = base.face(key).dim
    if p < 1:
        raise DegenerateFace("mixed derivative needs a face of positive dimension")
    nodes = [Fraction(k) for k in range(p + 1)]
    values = [summed_face_volume(fan, lam_beta, lam_alpha, key, s) for s in nodes]
    check = Fraction(p + 1)
    if _lagrange_eval(nodes, values, check) != summed_face_volume(fan, lam_beta, lam_alpha, key, check):
        raise DegreeOverflow(f"face volume is not a polynomial of degree <= {p} in s")
    return _lagrange_derivative_at_zero(nodes, values)
