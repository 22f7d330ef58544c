"""Shared complexes for the test suite."""

import numpy as np
import pytest

from hdx_verifier.core.generators import complete_complex, complete_partite, tetrahedron_boundary
from hdx_verifier.core.weights import homogeneous_weight, weight_from_top


@pytest.fixture
def triangle():
    return homogeneous_weight(complete_complex(3, 2))


@pytest.fixture
def tetrahedron():
    return homogeneous_weight(tetrahedron_boundary())


@pytest.fixture
def k6():
    return homogeneous_weight(complete_complex(6, 2))


@pytest.fixture
def k222():
    return homogeneous_weight(complete_partite([2, 2, 2]))


@pytest.fixture
def weighted_k5():
    """Complete 2-complex on 5 vertices with non-uniform top weights."""
    X = complete_complex(5, 2)
    rng = np.random.default_rng(7)
    return weight_from_top(X, rng.uniform(0.5, 2.0, X.size(2)))
