"""Test balanced weights, weighted links and regularity."""

import numpy as np
import pytest

from hdx_verifier.core.complex import detect_partite
from hdx_verifier.core.errors import WeightError
from hdx_verifier.core.generators import complete_complex, random_pure_complex
from hdx_verifier.core.weights import (
    WeightFunction,
    balance_residual,
    check_regularity,
    homogeneous_weight,
    link,
    total_weight,
    verify_weight_identities,
    vertex_weights,
    weight_from_top,
)


def test_homogeneous_weights_k6(k6):
    """m(tau) = (n-k)! times the number of triangles containing tau."""
    assert np.allclose(k6.level(0), 20.0)
    assert np.allclose(k6.level(1), 4.0)
    assert k6(()) == pytest.approx(120.0)
    assert total_weight(k6, 0) == pytest.approx(6 * 20)
    assert k6.is_homogeneous()
    assert balance_residual(k6) == 0.0


def test_weight_from_top_mapping(triangle):
    """Weights given per top simplex propagate down."""
    X = triangle.complex
    m = weight_from_top(X, {(0, 1, 2): 2.5})
    assert m((0, 1)) == pytest.approx(2.5)
    assert m((0,)) == pytest.approx(5.0)
    assert m.scaled(2.0)((0,)) == pytest.approx(10.0)


def test_rejects_bad_weights(triangle):
    """Non-positive or unbalanced weights raise."""
    X = triangle.complex
    with pytest.raises(WeightError):
        weight_from_top(X, [0.0])
    with pytest.raises(WeightError):
        WeightFunction(X, (np.ones(1), np.ones(3), np.ones(3), np.ones(1)))


def test_weight_identities_random(weighted_k5):
    """Balance and coface-count identities hold for arbitrary top weights."""
    report = verify_weight_identities(weighted_k5)
    assert report.passed
    assert report.check("coface_sum[k=-1,l=2]").passed


@pytest.mark.parametrize("seed", range(1, 21))
def test_weight_identities_on_random_complexes(seed):
    """Balance, coface-count and ratio identities on seeded random 2-complexes."""
    X = random_pure_complex(8, 2, 0.6, seed=seed)
    top = np.random.default_rng(seed).uniform(0.5, 3.0, X.size(2))
    for m in (homogeneous_weight(X), weight_from_top(X, top)):
        report = verify_weight_identities(m)
        assert report.passed
        assert report.max_residual < 1e-10
        assert report.check("total_ratio[k=0,l=2]").passed


def test_partite_weight_identities(k222):
    """m(S_i) = m(X(0))/(n+1) in a partite complex."""
    partite = detect_partite(k222.complex)
    report = verify_weight_identities(k222, partite)
    assert report.passed
    assert vertex_weights(k222, partite.sides[0]) == pytest.approx(total_weight(k222, 0) / 3)


def test_weighted_link(tetrahedron):
    """The link weight is m(tau | eta)."""
    X_tau, m_tau = link(tetrahedron.complex, tetrahedron, (0,))
    assert m_tau((1, 2)) == pytest.approx(tetrahedron((0, 1, 2)))
    assert m_tau((1,)) == pytest.approx(tetrahedron((0, 1)))
    assert X_tau.n == 1


def test_regularity():
    """K6 is 10-regular; K_{2,2,2} is regular per side."""
    k6 = complete_complex(6, 2)
    assert check_regularity(k6, homogeneous_weight(k6)).K == 10


def test_partite_regularity(k222):
    """Each side of K_{2,2,2} has K_i = 4."""
    regularity = check_regularity(k222.complex, k222)
    assert regularity.side_K == (4, 4, 4)
    assert regularity.K == 4


def test_regularity_needs_homogeneous(weighted_k5):
    """Non-homogeneous weights have no regularity."""
    assert check_regularity(weighted_k5.complex, weighted_k5) is None
