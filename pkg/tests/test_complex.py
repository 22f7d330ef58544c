"""Test simplicial complex construction, links and sides."""

import pytest

from hdx_verifier.core.complex import (
    build_complex,
    check_disjoint,
    detect_partite,
    link_complex,
    make_simplex,
    partite_from_sides,
    simplices_spanning,
    spanning_mask,
)
from hdx_verifier.core.errors import (
    ComplexError,
    ConnectivityError,
    DisjointnessError,
    LevelError,
    PartiteError,
)
from hdx_verifier.core.generators import complete_complex, complete_partite, tetrahedron_boundary


def test_build_triangle_faces():
    """A single triangle has f-vector (1, 3, 3, 1)."""
    X = build_complex([(2, 0, 1)])
    assert X.n == 2
    assert X.f_vector() == (1, 3, 3, 1)
    assert X.top_simplices == ((0, 1, 2),)
    assert X.simplices(-1) == ((),)


def test_build_rejects_bad_input():
    """Mixed sizes, duplicates and repeated vertices are rejected."""
    with pytest.raises(ComplexError):
        build_complex([(0, 1, 2), (0, 1)])
    with pytest.raises(ComplexError):
        build_complex([(0, 1), (1, 0)])
    with pytest.raises(ComplexError):
        make_simplex((0, 0, 1))
    with pytest.raises(ComplexError):
        build_complex([])


def test_index_and_cofaces():
    """Boundary and coface indices agree with the face lists."""
    X = tetrahedron_boundary()
    j = X.index_of((0, 1))
    faces = {X.simplices(0)[i] for i in X.boundary(1, j)}
    assert faces == {(0,), (1,)}
    cofaces = {X.simplices(2)[i] for i in X.cofaces(1, j)}
    assert cofaces == {(0, 1, 2), (0, 1, 3)}
    with pytest.raises(ComplexError):
        X.index_of((0, 5))
    with pytest.raises(LevelError):
        X.simplices(3)


def test_link_of_vertex():
    """The link of a vertex of the tetrahedron boundary is a triangle graph."""
    X = tetrahedron_boundary()
    L = link_complex(X, (0,))
    assert L.n == 1
    assert set(L.top_simplices) == {(1, 2), (1, 3), (2, 3)}
    assert link_complex(X, ()) == X


def test_spanning_sets():
    """X(U_0, U_1, U_2) in K6 for singletons is one triangle."""
    X = complete_complex(6, 2)
    assert simplices_spanning(X, [{0}, {1}, {2}]) == ((0, 1, 2),)
    mask = spanning_mask(X, [{0, 1}, {2}])
    assert mask.sum() == 2
    assert spanning_mask(X, [set(), {1}]).sum() == 0


def test_disjointness():
    """Overlapping vertex sets raise."""
    with pytest.raises(DisjointnessError):
        check_disjoint([{0, 1}, {1, 2}])


def test_detect_partite():
    """Sides are found for complete partite complexes and rejected for K4."""
    sides = detect_partite(complete_partite([2, 2, 2]))
    assert sides.sides == ((0, 1), (2, 3), (4, 5))
    assert sides.side_of[3] == 1
    assert detect_partite(tetrahedron_boundary()) is None


def test_detect_partite_disconnected():
    """A disconnected complex cannot be coloured consistently."""
    X = build_complex([(0, 1), (2, 3)])
    assert not X.is_connected()
    with pytest.raises(ConnectivityError):
        detect_partite(X)


def test_partite_from_sides():
    """User sides must partition the vertices and make tops rainbow."""
    X = complete_partite([1, 2])
    structure = partite_from_sides(X, [{0}, {1, 2}])
    assert structure.n == 1
    with pytest.raises(PartiteError):
        partite_from_sides(X, [{0, 1}, {2}])
    restricted = structure.restrict([1, 2])
    assert restricted.sides == ((1, 2),)
