"""Test cochain spaces, differentials and walk operators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hdx_verifier.core.cochains import (
    Cochain,
    CochainAlgebra,
    adjoint_residual,
    dump_operators,
    parallel_map,
    spawn_generators,
    verify_operator_identities,
)
from hdx_verifier.core.complex import detect_partite
from hdx_verifier.core.errors import LevelError, PartiteError
from hdx_verifier.core.generators import tetrahedron_boundary
from hdx_verifier.core.weights import weight_from_top

top_weights = arrays(np.float64, 4, elements=st.floats(min_value=0.1, max_value=10.0))


@settings(max_examples=25, deadline=None)
@given(weights=top_weights, seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_codifferential_is_adjoint(weights, seed):
    """<d phi, psi> = <phi, d* psi> for any balanced weight."""
    m = weight_from_top(tetrahedron_boundary(), weights)
    algebra = CochainAlgebra(m)
    rng = np.random.default_rng(seed)
    for k in range(-1, 2):
        phi = algebra.random_cochain(k, rng)
        psi = algebra.random_cochain(k + 1, rng)
        lhs = algebra.inner_product(algebra.d(phi), psi)
        rhs = algebra.inner_product(phi, algebra.dstar(psi))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(weights=top_weights)
def test_walks_are_stochastic_and_self_adjoint(weights):
    """Every walk has unit row sums and is self-adjoint for m."""
    m = weight_from_top(tetrahedron_boundary(), weights)
    algebra = CochainAlgebra(m)
    for op in (algebra.upper_walk(0), algebra.upper_walk(1), algebra.lower_walk(1),
               algebra.nonlazy_upper(0)):
        assert np.allclose(op.matrix.sum(axis=1), 1.0)
        assert adjoint_residual(op.matrix, m.level(op.domain)) < 1e-10


def test_operator_suite(weighted_k5):
    """All operator identities hold on a non-uniform weight."""
    report = verify_operator_identities(weighted_k5, trials=3)
    assert report.passed
    assert report.check("norm_dstar_d[k=1]").passed


def test_partite_operator_suite(k222):
    """Side functions are eigenfunctions with eigenvalue -1/n."""
    report = verify_operator_identities(k222, detect_partite(k222.complex), trials=3)
    assert report.passed
    assert report.check("side_eigenfunction[i=0]").passed
    assert report.check("walk_after_partite_projection[i=2]").passed


def test_compositions_match_walks(k6):
    """d*d = (k+2) M+ and dd* = (k+1) M-."""
    algebra = CochainAlgebra(k6)
    composed = algebra.compose_check_dstar_d(1)
    assert composed.report.passed
    assert np.allclose(composed.dstar_d.matrix, 3 * algebra.upper_walk(1).matrix)


def test_lower_zero_is_averaging(triangle):
    """M-_0 maps every 0-cochain to its m-average."""
    algebra = CochainAlgebra(triangle)
    phi = algebra.cochain(0, [1.0, 2.0, 6.0])
    assert algebra.lower_zero_value(phi) == pytest.approx(3.0)
    assert np.allclose(algebra.lower_walk(0)(phi).values, 3.0)


def test_level_mismatch(triangle):
    """Operators refuse cochains of the wrong level."""
    algebra = CochainAlgebra(triangle)
    with pytest.raises(LevelError):
        algebra.differential(0)(algebra.constant(1))
    with pytest.raises(LevelError):
        algebra.upper_walk(2)
    with pytest.raises(LevelError):
        algebra.inner_product(algebra.zero(0), algebra.zero(1))


def test_partite_projection_requires_sides(triangle):
    """Partite operators need a partite structure."""
    with pytest.raises(PartiteError):
        CochainAlgebra(triangle).partite_projection()


def test_cochain_is_read_only():
    """Cochain values cannot be modified in place."""
    phi = Cochain(0, np.zeros(3))
    with pytest.raises(ValueError):
        phi.values[0] = 1.0
    assert np.allclose((phi + phi * 2.0).values, 0.0)


def test_spawned_streams_are_reproducible():
    """The same seed yields the same child streams in the same order."""
    first = [g.random() for g in spawn_generators(3, 4)]
    second = [g.random() for g in spawn_generators(3, 4)]
    assert first == second
    assert parallel_map(lambda x: x * x, range(5), max_workers=2) == [0, 1, 4, 9, 16]


def test_dump_operators(tmp_path, triangle):
    """Every matrix is written as text."""
    written = dump_operators(CochainAlgebra(triangle), tmp_path / "ops")
    assert written
    assert all(path.exists() for path in written)
    loaded = np.loadtxt(tmp_path / "ops" / "Mplus_0.txt")
    assert loaded.shape == (3, 3)


def test_set_projection(k6):
    """P_{X(U_0,U_1)} keeps exactly the edges between the two sets."""
    algebra = CochainAlgebra(k6)
    projection = algebra.set_projection([(0, 1), (2,)])
    kept = algebra.complex.simplices(1)
    diagonal = np.diag(projection.matrix)
    assert {kept[i] for i in np.flatnonzero(diagonal)} == {(0, 2), (1, 2)}
    assert np.allclose(projection.matrix @ projection.matrix, projection.matrix)
