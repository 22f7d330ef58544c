"""Test link spectra, descent bounds and spectral hypotheses."""

import numpy as np
import pytest

from hdx_verifier.core.complex import build_complex
from hdx_verifier.core.errors import ConnectivityError, ParameterError, VacuousBoundError
from hdx_verifier.core.generators import complete_complex
from hdx_verifier.core.spectral import (
    check_one_sided_hypothesis,
    check_two_sided_hypothesis,
    descent_bound,
    link_spectral_report,
    link_spectrum,
    simplex_label,
    threshold_for_target,
    verify_descent,
    verify_explicit_descent,
)
from hdx_verifier.core.weights import homogeneous_weight


def test_triangle_spectrum(triangle):
    """The 1-skeleton of a triangle has walk spectrum {-1/2, -1/2, 1}."""
    spectrum = link_spectrum(triangle.complex, triangle, ())
    assert np.allclose(spectrum.spectrum, [-0.5, -0.5, 1.0])
    assert np.allclose(spectrum.nontrivial, [-0.5, -0.5])
    assert simplex_label(()) == "empty"
    assert simplex_label((0, 1)) == "0-1"


def test_k6_parameters(k6):
    """K6: -1/5 globally, -1/4 in every vertex link."""
    report = link_spectral_report(k6.complex, k6, max_workers=2)
    assert report.passed
    assert not report.partite
    assert report.mu(0) == pytest.approx(-0.2)
    assert report.nu(0) == pytest.approx(-0.2)
    assert report.mu(1) == pytest.approx(-0.25)
    assert report.lambda_two_sided() == pytest.approx(0.25)
    assert report.lambda_one_sided() == 0.0
    assert len(report.level_links(1)) == 6


def test_partite_spectrum(k222):
    """K_{2,2,2}: vertex links are 4-cycles whose only nontrivial value besides -1 is 0."""
    report = link_spectral_report(k222.complex, k222)
    assert report.partite
    assert report.passed
    assert report.lambda_two_sided() == pytest.approx(1.0)
    assert report.lambda_two_sided(partite_aware=True) == pytest.approx(0.0, abs=1e-12)
    assert report.lambda_one_sided(partite_aware=True) == pytest.approx(0.0, abs=1e-12)
    global_link = report.level_links(0)[0]
    assert np.allclose(sorted(global_link.nontrivial), [-0.5, -0.5, 0.0, 0.0, 0.0], atol=1e-12)
    assert check_one_sided_hypothesis(report, 0.0, partite_aware=True)
    assert not check_two_sided_hypothesis(report, 0.5)


def test_disconnected_link_raises():
    """Two triangles sharing only a vertex have a disconnected vertex link."""
    X = build_complex([(0, 1, 2), (0, 3, 4)])
    with pytest.raises(ConnectivityError) as info:
        link_spectrum(X, homogeneous_weight(X), (0,))
    assert info.value.simplex == (0,)


def test_descent_bound_values():
    """Two descent steps from 0.1 give 0.125."""
    bound = descent_bound(0.1, -0.1, 3, 0)
    assert bound.mu == pytest.approx(0.125)
    assert bound.nu == pytest.approx(-0.1 / 1.2)
    assert descent_bound(0.1, -0.1, 3, 2).mu == pytest.approx(0.1)


def test_descent_errors():
    """Vacuous denominators and bad levels raise."""
    with pytest.raises(VacuousBoundError):
        descent_bound(0.5, 0.0, 4, 0)
    with pytest.raises(ParameterError):
        descent_bound(0.1, 0.0, 3, 3)
    with pytest.raises(ParameterError):
        threshold_for_target(0.0, 2)


def test_threshold_for_target():
    """lambda/(1+(n-1)lambda)."""
    assert threshold_for_target(0.5, 3) == pytest.approx(0.25)
    assert threshold_for_target(0.5, 2) == pytest.approx(1 / 3)
    assert threshold_for_target(1.0, 1) == pytest.approx(1.0)


def test_descent_on_k6(k6):
    """The nu step is tight on K6 and the mu step is skipped for negative values."""
    report = verify_descent(link_spectral_report(k6.complex, k6))
    assert report.passed
    names = {c.name: c for c in report.checks}
    assert names["mu_step[k=0]"].kind == "skipped"
    assert names["nu_step[k=0]"].kind == "inequality"
    assert names["nu_step[k=0]"].lhs == pytest.approx(-0.2)
    assert names["nu_chain[k=0]"].kind == "inequality"
    assert names["nu_chain[k=0]"].lhs == pytest.approx(-0.2)


def test_nu_chain_two_steps():
    """On the 3-skeleton of K5 the chain from triangle links is tight at both levels."""
    X = complete_complex(5, 3)
    spectral = link_spectral_report(X, homogeneous_weight(X))
    assert spectral.nu(2) == pytest.approx(-0.5)
    report = verify_descent(spectral)
    assert report.passed
    names = {c.name: c for c in report.checks}
    assert names["nu_chain[k=0]"].lhs == pytest.approx(-0.25)
    assert names["nu_chain[k=0]"].rhs == pytest.approx(-0.25)
    assert names["nu_chain[k=1]"].lhs == pytest.approx(-1 / 3)
    assert names["mu_chain[k=0]"].kind == "skipped"


def test_explicit_descent(k6):
    """Top-level values below the threshold give lambda at every level."""
    spectral = link_spectral_report(k6.complex, k6)
    report = verify_explicit_descent(spectral, 0.5)
    assert report.passed
    assert report.check("threshold").lhs == pytest.approx(0.5 / 1.5)
    assert report.check("two_sided[k=0]").passed


def test_report_items(triangle):
    """Edge links of a single triangle have eigenvalue -1 unless partite-aware."""
    items = link_spectral_report(triangle.complex, triangle).items()
    assert items["PARTITE"] is True
    assert items["LAMBDA_TWO_SIDED"] == pytest.approx(1.0)
    assert items["LAMBDA_TWO_SIDED_PARTITE"] == pytest.approx(0.0, abs=1e-12)
    assert items["MU_0"] == pytest.approx(-0.5)
    assert items["N"] == 2


def test_spectra_need_dimension():
    """A 0-complex has no link spectra."""
    X = complete_complex(3, 0)
    with pytest.raises(ParameterError):
        link_spectral_report(X, homogeneous_weight(X))


def test_partite_aware_extremes(k222):
    """Side functions carry the -1 of a 4-cycle and the -1/2 of the octahedron."""
    report = link_spectral_report(k222.complex, k222)
    assert report.nu(1) == pytest.approx(-1.0)
    assert report.nu(1, partite_aware=True) == pytest.approx(0.0, abs=1e-12)
    assert report.mu(0, partite_aware=True) == pytest.approx(0.0, abs=1e-12)
    assert report.nu(0, partite_aware=True) == pytest.approx(0.0, abs=1e-12)
    items = report.items()
    assert items["NU_1_PARTITE"] == pytest.approx(0.0, abs=1e-12)
    assert items["NU_1"] == pytest.approx(-1.0)


def test_link_machine_keys(k6):
    """Every link contributes its level and nontrivial extremes."""
    extras = link_spectral_report(k6.complex, k6).machine_extras()
    assert extras["LINK_empty_K"] == 0
    assert extras["LINK_empty_MIN"] == pytest.approx(-0.2)
    assert extras["LINK_0_K"] == 1
    assert extras["LINK_0_MAX"] == pytest.approx(-0.25)
    assert len([key for key in extras if key.endswith("_K")]) == 7
    assert not any(key.endswith("_PARTITE") for key in extras)
