"""Localization of cochains to links and the Garland-type identities."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from hdx_verifier.core.cochains import (
    Cochain,
    CochainAlgebra,
    parallel_map,
    spawn_generators,
)
from hdx_verifier.core.complex import PartiteStructure, Simplex, SimplicialComplex, detect_partite
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import LevelError, ParameterError, PartiteError
from hdx_verifier.core.report import Check, IdentityReport
from hdx_verifier.core.weights import WeightFunction, link

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LocalizationView:
    """phi_tau on X_tau, with phi_tau(eta) = phi(tau | eta)."""

    level: int
    tau: Simplex
    cochain: Cochain
    link: CochainAlgebra


class Localizer:
    """Per-simplex links of one weighted complex, built once and reused."""

    def __init__(self, m: WeightFunction, partite: Optional[PartiteStructure] = None):
        self.m = m
        self.complex: SimplicialComplex = m.complex
        self.partite = partite
        self._links: Dict[Simplex, CochainAlgebra] = {}
        self._indices: Dict[Tuple[Simplex, int], np.ndarray] = {}

    def link(self, tau: Simplex) -> CochainAlgebra:
        tau = tuple(sorted(tau))
        if tau not in self._links:
            X_tau, m_tau = link(self.complex, self.m, tau)
            sides = self.partite.restrict(X_tau.vertices) if self.partite else None
            self._links[tau] = CochainAlgebra(m_tau, sides)
        return self._links[tau]

    def _index(self, tau: Simplex, level: int) -> np.ndarray:
        key = (tau, level)
        if key not in self._indices:
            X_tau = self.link(tau).complex
            self._indices[key] = np.array(
                [self.complex.index_of(tau + eta) for eta in X_tau.simplices(level)],
                dtype=np.intp,
            )
        return self._indices[key]

    def localize(self, phi: Cochain, tau: Iterable[int]) -> LocalizationView:
        tau = tuple(sorted(tau))
        self.complex.index_of(tau)
        k = len(tau) - 1
        if not k < phi.level:
            raise LevelError(f"Cannot localize a {phi.level}-cochain to a {k}-simplex")
        algebra = self.link(tau)
        level = phi.level - k - 1
        values = phi.values[self._index(tau, level)]
        return LocalizationView(phi.level, tau, Cochain(level, values), algebra)

    def prepare(self, taus: Iterable[Simplex], level: int) -> None:
        """Build links, index maps and the level-0 walks ahead of a parallel run."""
        for tau in taus:
            algebra = self.link(tau)
            self._index(tau, level - len(tau))
            if algebra.n >= 1:
                algebra.nonlazy_upper(0)
                algebra.differential(0)
            algebra.lower_walk(0)
            algebra.codifferential(-1)
            if algebra.partite is not None:
                algebra.partite_projection()


def localize(m: WeightFunction, phi: Cochain, tau: Iterable[int]) -> LocalizationView:
    """phi_tau for a single simplex; tau = () returns phi on X itself."""
    return Localizer(m).localize(phi, tau)


def _run_trials(fn: Callable[[np.random.Generator], Dict[str, float]], trials: int,
                seed: int, max_workers: Optional[int]) -> Dict[str, np.ndarray]:
    if trials < 1:
        raise ParameterError(f"trials={trials} must be at least 1")
    rows = parallel_map(fn, spawn_generators(seed, trials), max_workers)
    keys = rows[0].keys() if rows else []
    return {key: np.array([row[key] for row in rows]) for key in keys}


def _check_level(k: int, low: int, high: int) -> None:
    if not low <= k <= high:
        raise LevelError(f"Level k={k} outside {low}..{high}")


def verify_localization_identities(
    m: WeightFunction,
    k: int,
    trials: int = 100,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> IdentityReport:
    """Inner products of cochains, of d* and of d computed through localizations."""
    X = m.complex
    n = X.n
    _check_level(k, 0, n)
    tol = (tolerances or Tolerances()).accumulated
    algebra = CochainAlgebra(m)
    localizer = Localizer(m)
    taus = X.simplices(k - 1)
    localizer.prepare(taus, k)

    def trial(rng):
        phi, psi = algebra.random_cochain(k, rng), algebra.random_cochain(k, rng)
        locs = [(localizer.localize(phi, t), localizer.localize(psi, t)) for t in taus]
        out = {
            "inner": (k + 1) * algebra.inner_product(phi, psi),
            "inner_local": sum(a.link.inner_product(a.cochain, b.cochain) for a, b in locs),
            "dstar": algebra.inner_product(algebra.dstar(phi), algebra.dstar(psi)),
            "dstar_local": sum(a.link.inner_product(a.link.dstar(a.cochain),
                                                    a.link.dstar(b.cochain)) for a, b in locs),
        }
        if k < n:
            out["d"] = algebra.inner_product(algebra.d(phi), algebra.d(psi))
            out["d_local"] = sum(
                a.link.inner_product(a.link.d(a.cochain), a.link.d(b.cochain))
                - k / (k + 1) * a.link.inner_product(a.cochain, b.cochain)
                for a, b in locs
            )
        return out

    values = _run_trials(trial, trials, seed, max_workers)
    report = IdentityReport(title=f"Localization identities at k={k}")
    report.add(Check.identity(f"localized_inner[k={k}]", values["inner"],
                              values["inner_local"], tol))
    report.add(Check.identity(f"localized_dstar[k={k}]", values["dstar"],
                              values["dstar_local"], tol))
    if k < n:
        report.add(Check.identity(f"localized_d[k={k}]", values["d"], values["d_local"], tol))
    logger.info("Localization identities at k=%d: passed=%s", k, report.passed)
    return report


def _local_walk_term(view_phi: LocalizationView, view_psi: LocalizationView,
                     projection: str) -> float:
    """<(M'_tau)+_0 (I - Q) phi_tau, psi_tau> with Q the constant or side projection."""
    link_algebra = view_phi.link
    if link_algebra.n < 1:
        return 0.0
    q = (link_algebra.partite_projection() if projection == "partite"
         else link_algebra.lower_walk(0))
    phi = view_phi.cochain
    rest = phi - q(phi)
    return link_algebra.inner_product(link_algebra.nonlazy_upper(0)(rest), view_psi.cochain)


def _dstar_d_minus(algebra: CochainAlgebra, phi: Cochain, psi: Cochain,
                   lower_scale: float = 1.0) -> float:
    """<(d*d - c dd*) phi, psi> via <d phi, d psi> - c <d* phi, d* psi>."""
    return (algebra.inner_product(algebra.d(phi), algebra.d(psi))
            - lower_scale * algebra.inner_product(algebra.dstar(phi), algebra.dstar(psi)))


def verify_garland_decomposition(
    m: WeightFunction,
    k: int,
    trials: int = 100,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> IdentityReport:
    """Check the decomposition of <(d*d - dd*) phi, psi> over the links of X(k-1).

    The right side is <phi, psi> + sum_tau <(M'_tau)+_0 (I - M-_tau,0) phi_tau, psi_tau>.
    """
    X = m.complex
    _check_level(k, 0, X.n - 1)
    tol = (tolerances or Tolerances()).accumulated
    algebra = CochainAlgebra(m)
    localizer = Localizer(m)
    taus = X.simplices(k - 1)
    localizer.prepare(taus, k)

    def trial(rng):
        phi, psi = algebra.random_cochain(k, rng), algebra.random_cochain(k, rng)
        local = sum(_local_walk_term(localizer.localize(phi, t), localizer.localize(psi, t),
                                     "constants") for t in taus)
        return {"lhs": _dstar_d_minus(algebra, phi, psi),
                "rhs": algebra.inner_product(phi, psi) + local}

    values = _run_trials(trial, trials, seed, max_workers)
    report = IdentityReport(title=f"Garland decomposition at k={k}")
    report.add(Check.identity(f"garland_decomposition[k={k}]", values["lhs"], values["rhs"], tol))
    logger.info("Garland decomposition at k=%d: passed=%s", k, report.passed)
    return report


def verify_orthogonal_bound(
    m: WeightFunction,
    k: int,
    lam: float,
    trials: int = 100,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> IdentityReport:
    """|<(d*d - dd*) phi, psi>| <= (k+1) lambda |phi| |psi| for m-orthogonal pairs."""
    X = m.complex
    _check_level(k, 0, X.n - 1)
    if lam is None or lam < 0:
        raise ParameterError(f"A two-sided lambda >= 0 is required, got {lam}")
    tol = (tolerances or Tolerances()).inequality
    algebra = CochainAlgebra(m)

    def trial(rng):
        phi = algebra.random_cochain(k, rng)
        psi = algebra.orthogonalize(algebra.random_cochain(k, rng), phi)
        return {"lhs": abs(_dstar_d_minus(algebra, phi, psi)),
                "scale": (k + 1) * algebra.norm(phi) * algebra.norm(psi)}

    values = _run_trials(trial, trials, seed, max_workers)
    report = IdentityReport(title=f"Orthogonal pair bound at k={k}")
    rhs = lam * values["scale"]
    worst = int(np.argmax(values["lhs"] - rhs))
    report.add(Check.inequality(f"orthogonal_bound[k={k}]", values["lhs"][worst], rhs[worst], tol))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(values["scale"] > 0, values["lhs"] / values["scale"], 0.0)
    report.add(Check.diagnostic(f"orthogonal_ratio_max[k={k}]", float(ratios.max()),
                                note="|lhs| / ((k+1) |phi| |psi|), compare with lambda"))
    return report


def _side_set_mask(X: SimplicialComplex, partite: PartiteStructure, k: int,
                   sides: Sequence[int]) -> np.ndarray:
    """X(S_i; i in A): k-simplices meeting exactly the sides in A."""
    wanted = frozenset(sides)
    return np.array([frozenset(partite.side_of[v] for v in s) == wanted
                     for s in X.simplices(k)], dtype=bool)


def _partite_setup(m: WeightFunction, k: int, A: Sequence[int], B: Sequence[int],
                   partite: Optional[PartiteStructure]) -> PartiteStructure:
    X = m.complex
    n = X.n
    _check_level(k, 0, n - 1)
    if partite is None:
        partite = detect_partite(X)
        if partite is None:
            raise PartiteError("Complex is not partite")
    A, B = frozenset(A), frozenset(B)
    if not A | B <= set(range(n + 1)):
        raise ParameterError(f"Side indices must lie in 0..{n}")
    if len(A) != k + 1 or len(B) != k + 1:
        raise ParameterError(f"A and B must have {k + 1} sides each")
    if A == B:
        raise ParameterError("A and B must differ")
    return partite


def verify_partite_bound(
    m: WeightFunction,
    k: int,
    A: Sequence[int],
    B: Sequence[int],
    lam: float,
    partite: Optional[PartiteStructure] = None,
    trials: int = 100,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> IdentityReport:
    """|<(d*d - ((n+1-k)/(n-k)) dd*) phi, psi>| <= (n-k)(k+1) lambda |phi| |psi|.

    phi lives on X(S_i; i in A) and psi on X(S_i; i in B).
    """
    partite = _partite_setup(m, k, A, B, partite)
    if lam is None or lam < 0:
        raise ParameterError(f"A one-sided lambda >= 0 is required, got {lam}")
    tolerances = tolerances or Tolerances()
    X = m.complex
    n = X.n
    algebra = CochainAlgebra(m, partite)
    localizer = Localizer(m, partite)
    taus = X.simplices(k - 1)
    localizer.prepare(taus, k)
    mask_a = _side_set_mask(X, partite, k, A)
    mask_b = _side_set_mask(X, partite, k, B)
    scale = (n + 1 - k) / (n - k)

    def trial(rng):
        phi = Cochain(k, np.where(mask_a, rng.standard_normal(mask_a.size), 0.0))
        psi = Cochain(k, np.where(mask_b, rng.standard_normal(mask_b.size), 0.0))
        local = sum(_local_walk_term(localizer.localize(phi, t), localizer.localize(psi, t),
                                     "partite") for t in taus)
        return {"lhs": _dstar_d_minus(algebra, phi, psi, scale), "local": local,
                "scale": (n - k) * (k + 1) * algebra.norm(phi) * algebra.norm(psi)}

    values = _run_trials(trial, trials, seed, max_workers)
    label = f"k={k},A={''.join(map(str, sorted(A)))},B={''.join(map(str, sorted(B)))}"
    report = IdentityReport(title=f"Partite pair bound at {label}")
    report.add(Check.identity(f"partite_decomposition[{label}]", values["lhs"], values["local"],
                              tolerances.accumulated))
    bound = lam * values["scale"]
    worst = int(np.argmax(np.abs(values["lhs"]) - bound))
    report.add(Check.inequality(f"partite_bound[{label}]", abs(values["lhs"][worst]),
                                bound[worst], tolerances.inequality))
    report.merge(verify_partite_lemma_equation(m, k, A, B, partite, trials, seed,
                                               tolerances, max_workers))
    return report


def verify_partite_lemma_equation(
    m: WeightFunction,
    k: int,
    A: Sequence[int],
    B: Sequence[int],
    partite: Optional[PartiteStructure] = None,
    trials: int = 100,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> IdentityReport:
    """<(M'_tau)+_0 (M^{-,p}_tau,0 - M-_tau,0) phi_tau, psi_tau> against <d* phi_tau, d* psi_tau>.

    The equation holds with factor 1/(n-k); the factor -(n-k-1)/(n-k) is
    evaluated alongside and reported as a diagnostic.
    """
    if trials < 1:
        raise ParameterError(f"trials={trials} must be at least 1")
    partite = _partite_setup(m, k, A, B, partite)
    tol = (tolerances or Tolerances()).identity
    X = m.complex
    n = X.n
    localizer = Localizer(m, partite)
    taus = X.simplices(k - 1)
    localizer.prepare(taus, k)
    mask_a = _side_set_mask(X, partite, k, A)
    mask_b = _side_set_mask(X, partite, k, B)

    def trial(rng):
        phi = Cochain(k, np.where(mask_a, rng.standard_normal(mask_a.size), 0.0))
        psi = Cochain(k, np.where(mask_b, rng.standard_normal(mask_b.size), 0.0))
        lhs, dstar = [], []
        for t in taus:
            a, b = localizer.localize(phi, t), localizer.localize(psi, t)
            algebra = a.link
            between = (algebra.partite_projection()(a.cochain)
                       - algebra.lower_walk(0)(a.cochain))
            lhs.append(algebra.inner_product(algebra.nonlazy_upper(0)(between), b.cochain))
            dstar.append(algebra.inner_product(algebra.dstar(a.cochain),
                                               algebra.dstar(b.cochain)))
        return {"lhs": np.array(lhs), "dstar": np.array(dstar)}

    rows = parallel_map(trial, spawn_generators(seed, trials), max_workers)
    lhs = np.concatenate([r["lhs"] for r in rows]) if rows else np.empty(0)
    dstar = np.concatenate([r["dstar"] for r in rows]) if rows else np.empty(0)
    stated = dstar / (n - k)
    alternative = -(n - k - 1) / (n - k) * dstar

    report = IdentityReport(title=f"Partite lemma equation at k={k}")
    stated_check = report.add(Check.identity(f"partite_lemma[k={k}]", lhs, stated, tol,
                                             note="factor 1/(n-k)"))
    alternative_check = Check.identity(f"partite_lemma_alternative[k={k}]", lhs, alternative,
                                       tol)
    report.add(Check.diagnostic(
        f"partite_lemma_alternative[k={k}]", alternative_check.residual,
        note="factor -(n-k-1)/(n-k) " + ("holds" if alternative_check.passed else "fails"),
    ))
    if not stated_check.passed:
        logger.warning("Partite lemma equation with factor 1/(n-k) fails at k=%d "
                       "(residual %.3g); the alternative factor %s", k, stated_check.residual,
                       "holds" if alternative_check.passed else "fails too")
    return report
