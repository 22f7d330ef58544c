"""Test point depth, exact planar overlap and the overlap bound."""

import numpy as np
import pytest

from hdx_verifier.core.errors import FormatError, ParameterError
from hdx_verifier.core.generators import complete_complex, single_simplex, tetrahedron_boundary
from hdx_verifier.core.overlap import (
    PointMap,
    depth,
    overlap_bound,
    overlap_exact_2d,
    overlap_sampled,
    point_in_image,
    random_affine_map,
    with_bound,
)

QUADRILATERAL = {0: (0.0, 0.0), 1: (4.0, 0.0), 2: (3.0, 3.0), 3: (0.0, 2.0)}


@pytest.fixture
def convex_map():
    X = tetrahedron_boundary()
    return X, PointMap.for_complex(X, QUADRILATERAL)


def test_point_in_image(convex_map):
    _, f = convex_map
    assert point_in_image((0, 1, 2), f, (2.0, 1.0))
    assert point_in_image((0, 1, 2), f, (0.0, 0.0))
    assert not point_in_image((0, 1, 2), f, (5.0, 5.0))
    with pytest.raises(ParameterError):
        point_in_image((0, 1), f, (1.0, 0.0))


def test_degenerate_image():
    """A collinear image is handled as a segment."""
    X = single_simplex(2)
    f = PointMap.for_complex(X, {0: (0.0, 0.0), 1: (2.0, 0.0), 2: (4.0, 0.0)})
    assert point_in_image((0, 1, 2), f, (1.0, 0.0))
    assert not point_in_image((0, 1, 2), f, (1.0, 1.0))


def test_point_map_errors():
    X = single_simplex(2)
    with pytest.raises(FormatError):
        PointMap.for_complex(X, {0: (0.0, 0.0), 1: (1.0, 0.0)})
    with pytest.raises(FormatError):
        PointMap.for_complex(X, {0: (0.0, 0.0), 1: (1.0, 0.0), 2: (1.0, 1.0, 0.0)})


def test_centroid_depth(convex_map):
    """The centroid of a convex quadrilateral lies in two of the four triangles."""
    X, f = convex_map
    assert depth(X, f, (1.75, 1.25)) == 2


def test_exact_convex_k4(convex_map):
    X, f = convex_map
    report = overlap_exact_2d(X, f, seed=1, max_workers=2)
    assert report.depth == 2
    assert report.overlap == pytest.approx(0.5)
    assert not report.perturbed
    assert not report.degenerate
    assert report.items()["TOP_SIMPLICES"] == 4


def test_sampled_never_beats_exact(convex_map):
    X, f = convex_map
    exact = overlap_exact_2d(X, f)
    sampled = overlap_sampled(X, f, 200, seed=3)
    assert sampled.depth <= exact.depth
    assert sampled.candidates == 204
    with pytest.raises(ParameterError):
        overlap_sampled(X, f, -1)


def test_exact_is_affine_invariant(convex_map):
    X, f = convex_map
    matrix, offset = random_affine_map(np.random.default_rng(11), 2)
    moved = f.transformed(matrix, offset)
    assert overlap_exact_2d(X, moved).depth == overlap_exact_2d(X, f).depth


def test_collinear_points_are_perturbed():
    X = tetrahedron_boundary()
    f = PointMap.for_complex(X, {0: (0.0, 0.0), 1: (4.0, 0.0), 2: (2.0, 3.0), 3: (2.0, 0.0)})
    report = overlap_exact_2d(X, f)
    assert report.perturbed
    assert report.depth >= 1


def test_exact_needs_plane():
    X = complete_complex(4, 1)
    f = PointMap.for_complex(X, {v: (float(v),) for v in range(4)})
    with pytest.raises(ParameterError):
        overlap_exact_2d(X, f)


def test_overlap_bound_values():
    assert overlap_bound(0.0, 2, 0.5, "partite") == pytest.approx(0.5 ** 3)
    assert overlap_bound(0.1, 1, 0.5, "partite") == pytest.approx(0.5 * (0.5 - 0.2))
    assert overlap_bound(0.0, 2, 0.6, "nonpartite") == pytest.approx(2 * 0.6 * 0.2 ** 2)
    assert overlap_bound(1.0, 2, 0.5) < 0


@pytest.mark.parametrize("lam,pach,variant", [
    (0.0, 0.0, "partite"),
    (0.0, 1.5, "partite"),
    (-0.1, 0.5, "nonpartite"),
    (0.0, 0.5, "cubical"),
])
def test_overlap_bound_errors(lam, pach, variant):
    with pytest.raises(ParameterError):
        overlap_bound(lam, 2, pach, variant)


def test_with_bound(convex_map):
    """Bounds are reported always and asserted only on request."""
    X, f = convex_map
    report = overlap_exact_2d(X, f)
    loose = with_bound(report, 0.0, 1.0, "nonpartite")
    assert loose.bound == pytest.approx(2 / 9)
    assert loose.bound_holds is True
    strict = with_bound(report, 0.0, 1.0, "partite")
    assert strict.bound_holds is False
    assert strict.passed
    assert not with_bound(report, 0.0, 1.0, "partite", assert_bound=True).passed
    assert with_bound(report, 1.0, 0.5).bound_holds is None


def test_single_triangle_is_fully_covered():
    X = single_simplex(2)
    f = PointMap.for_complex(X, {0: (0.0, 0.0), 1: (1.0, 0.0), 2: (0.0, 1.0)})
    report = overlap_exact_2d(X, f)
    assert report.overlap == 1.0


@pytest.mark.parametrize("seed", range(50))
def test_exact_dominates_sampling_on_random_maps(seed):
    """Open-cell depth is never below sampled depth and survives affine maps."""
    rng = np.random.default_rng(seed)
    X = complete_complex(4 + seed % 3, 2)
    f = PointMap.for_complex(X, {v: rng.standard_normal(2) for v in X.vertices})
    exact = overlap_exact_2d(X, f, seed=seed)
    sampled = overlap_sampled(X, f, 10_000, seed=seed)
    assert exact.depth >= sampled.depth
    matrix, offset = random_affine_map(rng, 2)
    assert overlap_exact_2d(X, f.transformed(matrix, offset), seed=seed).depth == exact.depth
