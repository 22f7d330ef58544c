"""Spectra of the non-lazy upper walk on links, and spectral descent."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg

from hdx_verifier.core.cochains import (
    CochainAlgebra,
    LinearOperatorHandle,
    adjoint_residual,
    parallel_map,
    symmetrize,
)
from hdx_verifier.core.complex import (
    PartiteStructure,
    Simplex,
    SimplicialComplex,
    detect_partite,
)
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import (
    ConnectivityError,
    HDXError,
    ParameterError,
    SpectralError,
    VacuousBoundError,
)
from hdx_verifier.core.report import Check, IdentityReport, format_value
from hdx_verifier.core.weights import WeightFunction, link

logger = logging.getLogger(__name__)


def simplex_label(tau: Simplex) -> str:
    return "-".join(str(v) for v in tau) if tau else "empty"


def weighted_spectrum(op: LinearOperatorHandle, weights: np.ndarray,
                      tolerances: Optional[Tolerances] = None) -> np.ndarray:
    """Sorted real spectrum of an operator self-adjoint for <.,.>_m."""
    tol = (tolerances or Tolerances()).self_adjoint
    if op.domain != op.codomain:
        raise SpectralError(f"{op.name} is not an endomorphism")
    residual = adjoint_residual(op.matrix, weights)
    if residual > tol:
        raise SpectralError(f"{op.name} is not self-adjoint (residual {residual:.3g})")
    try:
        return linalg.eigvalsh(symmetrize(op.matrix, weights))
    except linalg.LinAlgError as exc:
        raise SpectralError(f"Eigensolver failed on {op.name}: {exc}") from exc


def complement_spectrum(matrix: np.ndarray, weights: np.ndarray,
                        projection: np.ndarray) -> np.ndarray:
    """Spectrum of ``matrix`` on the m-orthogonal complement of range(projection).

    ``projection`` must be an m-orthogonal projection commuting with ``matrix``.
    """
    sym = symmetrize(matrix, weights)
    keep = np.eye(len(weights)) - symmetrize(projection, weights)
    basis = linalg.orth(keep)
    if basis.shape[1] == 0:
        return np.empty(0)
    try:
        return linalg.eigvalsh(basis.T @ sym @ basis)
    except linalg.LinAlgError as exc:
        raise SpectralError(f"Eigensolver failed on restricted operator: {exc}") from exc


@dataclass(frozen=True)
class LinkSpectrum:
    """Spectrum of (M'_tau)+_0 for one tau in X(k-1)."""

    tau: Tuple[int, ...]
    k: int
    spectrum: Tuple[float, ...]
    nontrivial: Tuple[float, ...]
    partite_nontrivial: Optional[Tuple[float, ...]] = None
    sides: Optional[int] = None

    @property
    def is_partite(self) -> bool:
        return self.partite_nontrivial is not None

    @property
    def aware_nontrivial(self) -> Tuple[float, ...]:
        """Nontrivial values with partite-trivial ones removed where they apply."""
        return self.partite_nontrivial if self.is_partite else self.nontrivial


def _extreme(values, pick, default=None):
    values = list(values)
    return pick(values) if values else default


class SpectralReport(BaseModel):
    """Link spectra for every level 0..n-1 and the derived parameters."""

    title: str = "Link spectra"
    n: int
    partite: bool = False
    links: List[LinkSpectrum] = Field(default_factory=list)
    checks: List[Check] = Field(default_factory=list)

    def level_links(self, k: int) -> List[LinkSpectrum]:
        return [s for s in self.links if s.k == k]

    def _level_values(self, k: int, partite_aware: bool) -> List[float]:
        if partite_aware:
            return [v for s in self.level_links(k) for v in s.aware_nontrivial]
        return [v for s in self.level_links(k) for v in s.nontrivial]

    def mu(self, k: int, partite_aware: bool = False) -> Optional[float]:
        """Largest nontrivial eigenvalue over links of tau in X(k-1).

        By default only the constants are trivial, so an edge link of a single triangle
        gives -1. With ``partite_aware`` the side functions of partite links are removed too.
        """
        return _extreme(self._level_values(k, partite_aware), max)

    def nu(self, k: int, partite_aware: bool = False) -> Optional[float]:
        """Smallest nontrivial eigenvalue over links of tau in X(k-1); see :meth:`mu`."""
        return _extreme(self._level_values(k, partite_aware), min)

    @property
    def mus(self) -> Dict[int, Optional[float]]:
        return {k: self.mu(k) for k in range(self.n)}

    @property
    def nus(self) -> Dict[int, Optional[float]]:
        return {k: self.nu(k) for k in range(self.n)}

    def nontrivial_values(self, partite_aware: bool = False) -> List[float]:
        if partite_aware:
            return [v for s in self.links for v in s.aware_nontrivial]
        return [v for s in self.links for v in s.nontrivial]

    def lambda_two_sided(self, partite_aware: bool = False) -> float:
        """Smallest lambda with every nontrivial eigenvalue in [-lambda, lambda]."""
        return _extreme((abs(v) for v in self.nontrivial_values(partite_aware)), max, 0.0)

    def lambda_one_sided(self, partite_aware: bool = False) -> float:
        """Smallest lambda >= 0 with every nontrivial eigenvalue at most lambda."""
        return max(0.0, _extreme(self.nontrivial_values(partite_aware), max, 0.0))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def items(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"PASSED": self.passed, "N": self.n, "PARTITE": self.partite}
        for k in range(self.n):
            out[f"MU_{k}"] = self.mu(k)
            out[f"NU_{k}"] = self.nu(k)
            if self.partite:
                out[f"MU_{k}_PARTITE"] = self.mu(k, partite_aware=True)
                out[f"NU_{k}_PARTITE"] = self.nu(k, partite_aware=True)
        out["LAMBDA_TWO_SIDED"] = self.lambda_two_sided()
        out["LAMBDA_TWO_SIDED_PARTITE"] = self.lambda_two_sided(partite_aware=True)
        out["LAMBDA_ONE_SIDED"] = self.lambda_one_sided()
        out["LAMBDA_ONE_SIDED_PARTITE"] = self.lambda_one_sided(partite_aware=True)
        return out

    def machine_extras(self) -> Dict[str, Any]:
        """Per-link nontrivial extremes for machine output."""
        out: Dict[str, Any] = {}
        for s in self.links:
            label = f"LINK_{simplex_label(s.tau)}"
            out[f"{label}_K"] = s.k
            out[f"{label}_MIN"] = _extreme(s.nontrivial, min)
            out[f"{label}_MAX"] = _extreme(s.nontrivial, max)
            if s.is_partite:
                out[f"{label}_MIN_PARTITE"] = _extreme(s.partite_nontrivial, min)
                out[f"{label}_MAX_PARTITE"] = _extreme(s.partite_nontrivial, max)
        return out

    def markdown_sections(self) -> List[str]:
        lines = ["\n## Links\n", "| tau | k | min nontrivial | max nontrivial | partite |",
                 "|---|---|---|---|---|"]
        for s in self.links:
            lines.append(
                f"| {simplex_label(s.tau)} | {s.k} | {format_value(_extreme(s.nontrivial, min))} "
                f"| {format_value(_extreme(s.nontrivial, max))} | {format_value(s.is_partite)} |"
            )
        return lines


def _link_partite(X_tau: SimplicialComplex, tau: Simplex,
                  partite: Optional[PartiteStructure]) -> Optional[PartiteStructure]:
    if partite is not None:
        return partite.restrict(X_tau.vertices)
    try:
        return detect_partite(X_tau)
    except HDXError as exc:
        logger.warning("Treating link of %s as non-partite: %s", simplex_label(tau), exc)
        return None


def link_spectrum(X: SimplicialComplex, m: WeightFunction, tau: Simplex,
                  partite: Optional[PartiteStructure] = None,
                  tolerances: Optional[Tolerances] = None) -> LinkSpectrum:
    """Spectrum of the non-lazy upper 0-walk on X_tau, with trivial parts removed."""
    X_tau, m_tau = link(X, m, tau)
    if not X_tau.is_connected():
        raise ConnectivityError(f"Link of {simplex_label(tau)} is disconnected", simplex=tau)
    sides = _link_partite(X_tau, tau, partite)
    algebra = CochainAlgebra(m_tau, sides)
    walk = algebra.nonlazy_upper(0)
    weights = m_tau.level(0)
    spectrum = weighted_spectrum(walk, weights, tolerances)
    nontrivial = complement_spectrum(walk.matrix, weights, algebra.lower_walk(0).matrix)
    partite_nt = None
    if sides is not None:
        partite_nt = tuple(complement_spectrum(walk.matrix, weights,
                                               algebra.partite_projection().matrix))
    return LinkSpectrum(
        tau=tuple(tau),
        k=len(tau),
        spectrum=tuple(spectrum),
        nontrivial=tuple(nontrivial),
        partite_nontrivial=partite_nt,
        sides=len(sides.sides) if sides is not None else None,
    )


def link_spectral_report(
    X: SimplicialComplex,
    m: WeightFunction,
    partite: Optional[PartiteStructure] = None,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> SpectralReport:
    """Spectra of (M'_tau)+_0 for every tau in X(k-1), 0 <= k <= n-1."""
    tolerances = tolerances or Tolerances()
    if X.n < 1:
        raise ParameterError("Link spectra need a complex of dimension at least 1")
    if partite is None:
        partite = _link_partite(X, (), None)
    taus = [tau for k in range(X.n) for tau in X.simplices(k - 1)]
    logger.debug("Computing %d link spectra", len(taus))
    links = parallel_map(lambda tau: link_spectrum(X, m, tau, partite, tolerances),
                         taus, max_workers)

    report = SpectralReport(n=X.n, partite=partite is not None, links=links)
    tol = tolerances.inequality
    for s in links:
        label = simplex_label(s.tau)
        report.checks.append(Check.identity(f"contains_one[tau={label}]", s.spectrum[-1], 1.0,
                                            tolerances.identity))
        report.checks.append(Check.inequality(f"spectrum_in_range[tau={label}]",
                                              max(abs(s.spectrum[0]), abs(s.spectrum[-1])),
                                              1.0, tol))
        if s.is_partite and s.partite_nontrivial:
            lam, kappa = max(s.partite_nontrivial), min(s.partite_nontrivial)
            d = s.sides - 1
            report.checks.append(Check.inequality(f"partite_symmetry_lower[tau={label}]",
                                                  -d * lam, kappa, tol))
            report.checks.append(Check.inequality(f"partite_symmetry_upper[tau={label}]",
                                                  kappa, -lam / d, tol))
    logger.info("Link spectra: %d links, lambda two-sided %.6g, one-sided %.6g",
                len(links), report.lambda_two_sided(), report.lambda_one_sided())
    return report


def check_two_sided_hypothesis(report: SpectralReport, lam: float,
                               partite_aware: bool = False, slack: float = 1e-10) -> bool:
    """Every nontrivial link eigenvalue lies in [-lambda, lambda]."""
    return report.lambda_two_sided(partite_aware) <= lam + slack


def check_one_sided_hypothesis(report: SpectralReport, lam: float,
                               partite_aware: bool = False, slack: float = 1e-10) -> bool:
    """Every nontrivial link eigenvalue is at most lambda."""
    return _extreme(report.nontrivial_values(partite_aware), max, -1.0) <= lam + slack


class DescentBound(NamedTuple):
    mu: float
    nu: Optional[float]


def _descend(value: float, steps: int) -> Optional[float]:
    denominator = 1.0 - steps * value
    if denominator <= 0:
        return None
    return value / denominator


def descent_bound(mu_top: float, nu_top: float, n: int, k: int) -> DescentBound:
    """Bounds on mu_k and nu_k from the (n-1)-level values.

    The nu bound is None when its own denominator is not positive.
    """
    if not 0 <= k <= n - 1:
        raise ParameterError(f"Level k={k} outside 0..{n - 1}")
    if nu_top < -1:
        raise ParameterError(f"nu={nu_top} is below -1")
    mu = _descend(mu_top, n - 1 - k)
    if mu is None:
        raise VacuousBoundError(f"mu={mu_top} gives a non-positive denominator at k={k}")
    return DescentBound(mu, _descend(nu_top, n - 1 - k))


def threshold_for_target(lam: float, n: int) -> float:
    """Largest mu_{n-1} that descends to mu_0 <= lambda."""
    if not 0 < lam <= 1:
        raise ParameterError(f"lambda={lam} must lie in (0, 1]")
    if n < 1:
        raise ParameterError(f"n={n} must be at least 1")
    return lam / (1 + (n - 1) * lam)


class DescentReport(BaseModel):
    """One-step and chained descent inequalities between measured levels."""

    title: str = "Spectral descent"
    n: int
    mu: Dict[int, Optional[float]]
    nu: Dict[int, Optional[float]]
    checks: List[Check] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def items(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"PASSED": self.passed}
        for k in range(self.n):
            out[f"MU_{k}"] = self.mu[k]
            out[f"NU_{k}"] = self.nu[k]
        return out


def verify_descent(report: SpectralReport,
                   tolerances: Optional[Tolerances] = None) -> DescentReport:
    """mu_k <= mu_{k+1}/(1-mu_{k+1}) and nu_k >= nu_{k+1}/(1-nu_{k+1}) where meaningful."""
    tol = (tolerances or Tolerances()).inequality
    n = report.n
    out = DescentReport(n=n, mu=report.mus, nu=report.nus)
    for k in range(n - 1):
        mu, mu_up = out.mu[k], out.mu[k + 1]
        if mu_up is None or mu_up < 0:
            out.checks.append(Check.skipped(f"mu_step[k={k}]", "mu_{k+1} is negative"))
        elif mu_up >= 1:
            out.checks.append(Check.skipped(f"mu_step[k={k}]", "vacuous bound"))
        else:
            out.checks.append(Check.inequality(f"mu_step[k={k}]", mu, mu_up / (1 - mu_up), tol))

        nu, nu_up = out.nu[k], out.nu[k + 1]
        if nu_up is None or nu_up > 0:
            out.checks.append(Check.skipped(f"nu_step[k={k}]", "nu_{k+1} is positive"))
        else:
            out.checks.append(Check.inequality(f"nu_step[k={k}]", nu_up / (1 - nu_up), nu, tol))

    mu_top, nu_top = out.mu[n - 1], out.nu[n - 1]
    for k in range(n - 1):
        if mu_top is None or mu_top < 0:
            out.checks.append(Check.skipped(f"mu_chain[k={k}]", "mu_{n-1} is negative"))
        else:
            try:
                bound = descent_bound(mu_top, nu_top, n, k)
            except VacuousBoundError as exc:
                logger.warning("Descent chain at k=%d is vacuous: %s", k, exc)
                out.checks.append(Check.skipped(f"mu_chain[k={k}]", "vacuous bound"))
            else:
                out.checks.append(Check.inequality(f"mu_chain[k={k}]", out.mu[k], bound.mu, tol))

        if nu_top is None or nu_top > 0:
            out.checks.append(Check.skipped(f"nu_chain[k={k}]", "nu_{n-1} is positive"))
            continue
        nu_bound = _descend(nu_top, n - 1 - k)
        out.checks.append(Check.inequality(f"nu_chain[k={k}]", nu_bound, out.nu[k], tol))
    logger.info("Descent: %d checks, passed=%s", len(out.checks), out.passed)
    return out


def verify_explicit_descent(report: SpectralReport, lam: float,
                            tolerances: Optional[Tolerances] = None) -> IdentityReport:
    """If the top level meets the threshold for lambda, every level meets lambda."""
    tol = (tolerances or Tolerances()).inequality
    n = report.n
    threshold = threshold_for_target(lam, n)
    out = IdentityReport(title=f"Explicit descent for lambda={format_value(lam)}")
    out.add(Check.diagnostic("threshold", threshold))

    mu_top, nu_top = report.mu(n - 1), report.nu(n - 1)
    if mu_top is not None and mu_top <= threshold + tol:
        for k in range(n):
            out.add(Check.inequality(f"one_sided[k={k}]", report.mu(k), lam, tol))
    else:
        out.add(Check.skipped("one_sided", "top-level mu exceeds the threshold"))

    if mu_top is not None and max(abs(mu_top), abs(nu_top)) <= threshold + tol:
        for k in range(n):
            out.add(Check.inequality(f"two_sided[k={k}]",
                                     max(abs(report.mu(k)), abs(report.nu(k))), lam, tol))
    else:
        out.add(Check.skipped("two_sided", "top-level spectrum exceeds the threshold"))
    return out
