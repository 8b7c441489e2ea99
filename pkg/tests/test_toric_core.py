from fractions import Fraction as Fr
from itertools import combinations

import pytest

from mjtoric.errors import (DegenerateFace, InvalidPolytope, NonUnimodularVertex, NotFullDimensional,
                            UnboundedPolytope)
from mjtoric.toric_core import (DelzantPolytope, barycenter, enumerate_faces, face_chart,
                                integrate_affine, lattice_volume, mixed_first_derivative,
                                summed_face_volume, validate_delzant)
from oracles import CUBE_NORMALS, P2_NORMALS, SQUARE_NORMALS, simplex_moment


@pytest.fixture
def simplex():
    return DelzantPolytope.from_data(P2_NORMALS, [0, 0, 1])


@pytest.fixture
def square():
    return DelzantPolytope.from_data(SQUARE_NORMALS, [0, 1, 0, 1])


def test_standard_polytopes_are_valid(simplex, square):
    assert validate_delzant(simplex).valid
    assert validate_delzant(square).valid


def test_non_unimodular_vertex_reports_witness():
    P = DelzantPolytope.from_data([(1, 0), (0, 1), (-1, -2)], [0, 0, 1], check=False)
    rep = validate_delzant(P)
    assert not rep.valid
    assert isinstance(rep.error, NonUnimodularVertex)
    assert set(rep.error.facets) == {0, 2}
    assert rep.error.det == -2
    with pytest.raises(InvalidPolytope):
        enumerate_faces(P)


def test_unbounded_and_flat_polytopes_are_rejected():
    rep = validate_delzant(DelzantPolytope.from_data([(1, 0), (0, 1)], [0, 0], check=False))
    assert isinstance(rep.error, UnboundedPolytope)
    rep = validate_delzant(DelzantPolytope.from_data([(1,), (-1,)], [0, 0], check=False))
    assert isinstance(rep.error, NotFullDimensional)


def test_non_primitive_normal_is_rejected():
    with pytest.raises(ValueError):
        DelzantPolytope.from_data([(2,), (-1,)], [0, 1])


@pytest.mark.parametrize("normals,offsets,counts", [
    (P2_NORMALS, [0, 0, 1], {0: 3, 1: 3, 2: 1}),
    (CUBE_NORMALS, [0, 1] * 3, {0: 8, 1: 12, 2: 6, 3: 1}),
    ([(1,), (-1,)], [0, 3], {0: 2, 1: 1}),
])
def test_face_counts_and_euler_relation(normals, offsets, counts):
    faces = enumerate_faces(DelzantPolytope.from_data(normals, offsets))
    by_dim = {}
    for f in faces:
        by_dim[f.dim] = by_dim.get(f.dim, 0) + 1
    assert by_dim == counts
    assert sum((-1) ** p * k for p, k in by_dim.items()) == 1
    assert len({f.facets for f in faces}) == len(faces)


def test_chart_of_hypotenuse(simplex):
    ch = face_chart(simplex, (2,))
    assert ch.dim == 1
    assert tuple(abs(x) for x in ch.basis[0]) == (1, 1)
    for v in simplex.face((2,)).vertices:
        assert ch.forward(ch.backward(v)) == v
    assert lattice_volume(simplex, (2,)) == 1
    with pytest.raises(DegenerateFace):
        face_chart(simplex, (0, 1))


def test_volumes(simplex, square):
    assert lattice_volume(simplex) == Fr(1, 2)
    assert lattice_volume(square, (3,)) == 1
    assert lattice_volume(DelzantPolytope.from_data(P2_NORMALS, [0, 0, 3])) == Fr(9, 2)
    assert lattice_volume(simplex, (0, 1)) == 1


def test_affine_integrals_match_symbolic_moments(simplex, square):
    assert integrate_affine(simplex, (), ((1, 0), 0)) == simplex_moment((1, 0))
    assert integrate_affine(simplex, (), ((0, 1), 0)) == simplex_moment((0, 1))
    assert integrate_affine(simplex, (), ((0, 0), 1)) == lattice_volume(simplex)
    bottom = [f.facets for f in square.faces(1) if f.facets == (2,)][0]
    assert integrate_affine(square, bottom, ((1, 0), 0)) == Fr(1, 2)


def test_affine_exactness_at_barycenter():
    P = DelzantPolytope.from_data(P2_NORMALS, [Fr(1, 3), Fr(-1, 5), 2])
    A = ((Fr(3, 7), Fr(-2)), Fr(5, 4))
    for F in P.faces():
        if F.dim == 0:
            continue
        b = barycenter(P, F)
        expected = (sum(a * y for a, y in zip(A[0], b)) + A[1]) * lattice_volume(P, F)
        assert integrate_affine(P, F, A) == expected


def test_volume_invariant_under_translation_and_unimodular_change():
    P = DelzantPolytope.from_data(P2_NORMALS, [Fr(1, 2), 0, 2])
    # translate by t = (1, -2): offsets change by -<u_i, t>
    t = (1, -2)
    Q = DelzantPolytope.from_data(P2_NORMALS, [l - sum(a * b for a, b in zip(u, t))
                                              for u, l in zip(P2_NORMALS, P.offsets)])
    # shear y -> M y with M = [[1, 1], [0, 1]] acts on normals by u -> M^-T u
    shear = [(u[0], u[1] - u[0]) for u in P2_NORMALS]
    R = DelzantPolytope.from_data(shear, P.offsets)
    for F in P.faces():
        assert lattice_volume(P, F.facets) == lattice_volume(Q, F.facets) == lattice_volume(R, F.facets)


def test_summed_volumes():
    lb, la = [0, 0, 1], [0, 0, 1]
    assert summed_face_volume(P2_NORMALS, lb, la, (), 1) == 2
    assert summed_face_volume(P2_NORMALS, lb, la, (), 0) == Fr(1, 2)
    lb, la = [0, 1, 0, 1], [0, 3, 0, 3]
    assert summed_face_volume(SQUARE_NORMALS, lb, la, (2,), 2) == 7


def test_summed_volume_is_polynomial_of_degree_p():
    lb, la = [0, 1, 0, 1, Fr(1, 2), 2], [1, 0, 2, 1, 0, 1]
    for face in [(), (0,), (0, 2)]:
        vals = [summed_face_volume(CUBE_NORMALS, lb, la, face, s) for s in range(5)]
        p = 3 - len(face)
        # finite differences of order p + 1 vanish
        for _ in range(p + 1):
            vals = [b - a for a, b in zip(vals, vals[1:])]
        assert all(v == 0 for v in vals)


def test_mixed_first_derivative():
    assert mixed_first_derivative(P2_NORMALS, [0, 0, 1], [0, 0, Fr(3, 4)], ()) == Fr(3, 4)
    assert mixed_first_derivative([(1,), (-1,)], [0, 1], [0, 2], ()) == 2
    P = DelzantPolytope.from_data(CUBE_NORMALS, [0, 1, 0, 2, 1, 1])
    for F in P.faces():
        if F.dim >= 1:
            assert mixed_first_derivative(CUBE_NORMALS, P.offsets, P.offsets, F.facets) == \
                F.dim * lattice_volume(P, F)


def test_all_pairs_of_simplex_facets_meet():
    P = DelzantPolytope.from_data(P2_NORMALS, [0, 0, 1])
    keys = {f.facets for f in P.faces(0)}
    assert keys == set(combinations(range(3), 2))
