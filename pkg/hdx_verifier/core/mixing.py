"""Restricted walk products, telescoping and the mixing inequalities."""

import logging
from math import factorial, prod, sqrt
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg

from hdx_verifier.core.cochains import (
    CochainAlgebra,
    LinearOperatorHandle,
    parallel_map,
    spawn_generators,
)
from hdx_verifier.core.complex import (
    PartiteStructure,
    SimplicialComplex,
    check_disjoint,
    detect_partite,
    spanning_mask,
)
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import (
    ParameterError,
    PartiteError,
    VacuousBoundError,
)
from hdx_verifier.core.report import Check, IdentityReport, format_value
from hdx_verifier.core.spectral import SpectralReport, link_spectral_report
from hdx_verifier.core.weights import (
    WeightFunction,
    check_regularity,
    total_weight,
    vertex_weights,
)

logger = logging.getLogger(__name__)

VertexSets = Sequence[Iterable[int]]


def level_constant(n: int, k: int) -> int:
    """(k+1)(k+2)^{n-k} - (k+1)^{n-k+1}."""
    return (k + 1) * (k + 2) ** (n - k) - (k + 1) ** (n - k + 1)


def constant_C(n: int) -> int:
    if n < 1:
        raise ParameterError(f"n={n} must be at least 1")
    return sum(level_constant(n, k) for k in range(n))


def constant_C_partite(n: int) -> int:
    if n < 1:
        raise ParameterError(f"n={n} must be at least 1")
    return sum(
        factorial(n) // factorial(n - k - 1) * (n + 1 - k) ** (n - k) * level_constant(n, k)
        for k in range(n)
    )


def partite_ratio(n: int, k: int) -> float:
    """(n+1-k)/(n-k), the scale on d_{k-1} d*_{k-1} in the partite bracket."""
    return (n + 1 - k) / (n - k)


def telescoping_weight(n: int, k: int) -> float:
    """Exact weight of the k-th partite bracket: prod_{j=k+1}^{n-1} r_j^{n-j}."""
    return prod(partite_ratio(n, j) ** (n - j) for j in range(k + 1, n))


def published_weight(n: int, k: int) -> float:
    """(n+1-k)^{n-k}/(n-k)!, an upper bound for ``telescoping_weight``."""
    return (n + 1 - k) ** (n - k) / factorial(n - k)


def constant_C_partite_exact(n: int) -> float:
    """The partite constant recomputed with the exact telescoping weights."""
    return sum(factorial(n) * telescoping_weight(n, k) * (n - k) * level_constant(n, k)
               for k in range(n))


def _sets(X: SimplicialComplex, vertex_sets: VertexSets) -> List[Tuple[int, ...]]:
    frozen = check_disjoint(vertex_sets)
    if len(frozen) != X.n + 1:
        raise ParameterError(f"Expected {X.n + 1} vertex sets, got {len(frozen)}")
    unknown = set().union(*frozen) - set(X.vertices)
    if unknown:
        raise ParameterError(f"Vertices {sorted(unknown)[:5]} are not in the complex")
    return [tuple(sorted(u)) for u in frozen]


def _window(sets: Sequence[Tuple[int, ...]], start: int, k: int) -> Sequence[Tuple[int, ...]]:
    """U_start, ..., U_{start+k}."""
    return sets[start:start + k + 1]


def _restricted_product(algebra: CochainAlgebra, k: int, vertex_sets: VertexSets,
                        step: LinearOperatorHandle, name: str) -> LinearOperatorHandle:
    n = algebra.n
    if not 0 <= k <= n - 1:
        raise ParameterError(f"k={k} outside 0..{n - 1}")
    sets = _sets(algebra.complex, vertex_sets)
    result = np.eye(algebra.complex.size(k))
    for i in range(1, n - k + 1):
        mask = spanning_mask(algebra.complex, _window(sets, i, k))
        result = mask[:, None] * (step.matrix @ result)
    return LinearOperatorHandle(f"{name}[k={k}]", k, k, result)


def restricted_upper_product(algebra: CochainAlgebra, k: int,
                             vertex_sets: VertexSets) -> LinearOperatorHandle:
    """prod_{i=1}^{n-k} P_{X(U_i..U_{k+i})} d*_k d_k, applied right to left."""
    step = algebra.codifferential(k) @ algebra.differential(k)
    return _restricted_product(algebra, k, vertex_sets, step, "upper_product")


def restricted_lower_product(algebra: CochainAlgebra, k: int, vertex_sets: VertexSets,
                             scale: float = 1.0) -> LinearOperatorHandle:
    """prod_{i=1}^{n-k} P_{X(U_i..U_{k+i})} (scale d_{k-1} d*_{k-1})."""
    down = algebra.differential(k - 1) @ algebra.codifferential(k - 1)
    step = LinearOperatorHandle("scaled_down", k, k, scale * down.matrix)
    return _restricted_product(algebra, k, vertex_sets, step, "lower_product")


def _paired_product(algebra: CochainAlgebra, sets: Sequence[Tuple[int, ...]], k: int,
                    step: np.ndarray, factors: int) -> float:
    """<(prod_{i=1}^{factors} P_i step) chi_{X(U_0..U_k)}, chi_{X(U_{n-k}..U_n)}>, k-level."""
    X = algebra.complex
    n = algebra.n
    v = spanning_mask(X, _window(sets, 0, k)).astype(float)
    for i in range(1, factors + 1):
        v = spanning_mask(X, _window(sets, i, k)) * (step @ v)
    target = spanning_mask(X, _window(sets, n - k, k)).astype(float)
    return float(np.dot(algebra.m.level(k) * v, target))


def top_term(algebra: CochainAlgebra, sets: Sequence[Tuple[int, ...]], k: int) -> float:
    """T_k = <prod P d*_k d_k chi_{X(U_0..U_k)}, chi_{X(U_{n-k}..U_n)}>."""
    step = (algebra.codifferential(k) @ algebra.differential(k)).matrix
    return _paired_product(algebra, sets, k, step, algebra.n - k)


def bottom_term(algebra: CochainAlgebra, sets: Sequence[Tuple[int, ...]], k: int) -> float:
    """B_k = <prod P d_{k-1} d*_{k-1} chi_{X(U_0..U_k)}, chi_{X(U_{n-k}..U_n)}>."""
    step = (algebra.differential(k - 1) @ algebra.codifferential(k - 1)).matrix
    return _paired_product(algebra, sets, k, step, algebra.n - k)


def bottom_closed_form(m: WeightFunction, sets: VertexSets) -> float:
    """m(U_0)...m(U_n)/m(X(0))^n."""
    weights = [vertex_weights(m, u) for u in sets]
    return prod(weights) / total_weight(m, 0) ** m.complex.n


def bottom_product_value(m: WeightFunction, vertex_sets: VertexSets,
                         tolerances: Optional[Tolerances] = None) -> Check:
    """B_0 by operator assembly, checked against the closed form.

    The check carries the operator value in ``lhs`` and the closed form in ``rhs``.
    """
    algebra = CochainAlgebra(m)
    sets = _sets(m.complex, vertex_sets)
    value = bottom_term(algebra, sets, 0)
    check = Check.identity("bottom_closed_form", value, bottom_closed_form(m, sets),
                           (tolerances or Tolerances()).identity)
    if not check.passed:
        logger.warning("Bottom product %.12g differs from closed form %.12g", value, check.rhs)
    return check


def verify_exchange_lemmas(m: WeightFunction, vertex_sets: VertexSets, k: int,
                           tolerances: Optional[Tolerances] = None) -> IdentityReport:
    """Projection exchange identities, the product identity and its pairing form at level k."""
    tol = (tolerances or Tolerances()).identity
    X = m.complex
    n = X.n
    sets = _sets(X, vertex_sets)
    algebra = CochainAlgebra(m)
    report = IdentityReport(title=f"Exchange lemmas at k={k}")

    def P(start, level):
        return np.diag(spanning_mask(X, _window(sets, start, level)).astype(float))

    if 0 <= k <= n - 1:
        d, ds = algebra.differential(k).matrix, algebra.codifferential(k).matrix
        lhs = P(1, k) @ ds @ P(0, k + 1) @ d @ P(0, k)
        rhs = P(1, k) @ ds @ d @ P(0, k)
        report.add(Check.identity(f"exchange_upper[k={k}]", lhs, rhs, tol))

        inner = np.eye(X.size(k + 1))
        for i in range(1, n - k):
            inner = P(i, k + 1) @ d @ ds @ inner
        lhs = P(n - k, k) @ ds @ inner @ P(0, k + 1) @ d @ P(0, k)
        rhs = restricted_upper_product(algebra, k, sets).matrix @ P(0, k)
        report.add(Check.identity(f"product_identity[k={k}]", lhs, rhs, tol))
    else:
        report.add(Check.skipped(f"exchange_upper[k={k}]", "needs 0 <= k <= n-1"))
        report.add(Check.skipped(f"product_identity[k={k}]", "needs 0 <= k <= n-1"))

    if 0 <= k <= n - 2:
        d, ds = algebra.differential(k).matrix, algebra.codifferential(k).matrix
        lhs = P(1, k + 1) @ d @ P(1, k) @ ds @ P(0, k + 1)
        rhs = P(1, k + 1) @ d @ ds @ P(0, k + 1)
        report.add(Check.identity(f"exchange_lower[k={k}]", lhs, rhs, tol))
        report.add(Check.identity(f"pairing[k={k}]", bottom_term(algebra, sets, k + 1),
                                  top_term(algebra, sets, k), tol))
    else:
        report.add(Check.skipped(f"exchange_lower[k={k}]", "needs 0 <= k <= n-2"))
        report.add(Check.skipped(f"pairing[k={k}]", "needs 0 <= k <= n-2"))

    report.add(Check.identity("bottom_closed_form", bottom_term(algebra, sets, 0),
                              bottom_closed_form(m, sets), tol))
    return report


def product_difference_norms(m: WeightFunction, vertex_sets: VertexSets, lam: float,
                             partite: bool = False) -> List[Check]:
    """m-weighted spectral norms of the restricted product differences, with their bounds."""
    X = m.complex
    n = X.n
    sets = _sets(X, vertex_sets)
    algebra = CochainAlgebra(m)
    checks = []
    for k in range(n):
        scale = partite_ratio(n, k) if partite else 1.0
        up = (algebra.codifferential(k) @ algebra.differential(k)).matrix
        down = scale * (algebra.differential(k - 1) @ algebra.codifferential(k - 1)).matrix
        upper = lower = np.eye(X.size(k))
        for i in range(1, n - k + 1):
            left = spanning_mask(X, _window(sets, i, k))[:, None]
            right = spanning_mask(X, _window(sets, i - 1, k))[None, :]
            upper = (left * up * right) @ upper
            lower = (left * down * right) @ lower
        weights = m.level(k)
        norm = float(linalg.norm(_weighted_similarity(upper - lower, weights), 2))
        bound = lam * level_constant(n, k) * ((n - k) if partite else 1)
        checks.append(Check.diagnostic(f"product_norm[k={k}]", norm,
                                       note=f"bound {format_value(bound)}"))
    return checks


def _weighted_similarity(matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """diag(sqrt m) A diag(1/sqrt m) without symmetrizing, for operator norms."""
    root = np.sqrt(weights)
    return root[:, None] * matrix / root[None, :]


class LevelTerm(BaseModel):
    """One level of the telescoping sum."""

    k: int
    top: float
    bottom: float
    bracket: float
    weight: float = 1.0
    bound: float


class MixingReport(BaseModel):
    """Both sides of a mixing inequality with its telescoping breakdown."""

    title: str = "Mixing"
    partite: bool = False
    sets: List[List[int]]
    lam: float
    lam_source: str = "measured"
    hypothesis_verified: Optional[bool] = None
    measure: float
    main_term: float
    lhs: float
    rhs: float
    constant: float
    pair_term: float
    tolerance: float = 1e-9
    levels: List[LevelTerm] = Field(default_factory=list)
    checks: List[Check] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.tolerance

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.holds and all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def items(self) -> Dict[str, Any]:
        return {
            "PASSED": self.passed,
            "LHS": self.lhs,
            "RHS": self.rhs,
            "HOLDS": self.holds,
            "SLACK": self.slack,
            "LAMBDA": self.lam,
            "LAMBDA_SOURCE": self.lam_source,
            "HYPOTHESIS": "unchecked" if self.hypothesis_verified is None
            else ("verified" if self.hypothesis_verified else "unverified"),
            "MEASURE": self.measure,
            "MAIN_TERM": self.main_term,
            "CONSTANT": self.constant,
        }

    def markdown_sections(self) -> List[str]:
        lines = ["\n## Telescoping\n", "| k | T_k | B_k | bracket | weight | bound |",
                 "|---|---|---|---|---|---|"]
        for t in self.levels:
            lines.append(f"| {t.k} | {format_value(t.top)} | {format_value(t.bottom)} "
                         f"| {format_value(t.bracket)} | {format_value(t.weight)} "
                         f"| {format_value(t.bound)} |")
        return lines


def _min_pair_order(scores: Sequence[float]) -> List[int]:
    """Order placing the two smallest scores first and last, others in between."""
    ranked = sorted(range(len(scores)), key=lambda i: (scores[i], i))
    first, last = ranked[0], ranked[1]
    middle = [i for i in range(len(scores)) if i not in (first, last)]
    return [first] + middle + [last]


def lambda_from_top_links(report: SpectralReport, one_sided: bool = False,
                          partite_aware: bool = False) -> float:
    """Invert the explicit descent threshold on the (n-2)-level links."""
    n = report.n
    links = report.level_links(n - 1)
    if partite_aware:
        values = [v for s in links for v in s.aware_nontrivial]
    else:
        values = [v for s in links for v in s.nontrivial]
    if one_sided:
        mu = max(0.0, max(values, default=0.0))
    else:
        mu = max((abs(v) for v in values), default=0.0)
    denominator = 1 - (n - 1) * mu
    if denominator <= 0:
        raise VacuousBoundError(f"Top-link value {mu:.6g} admits no lambda")
    return mu / denominator


def _resolve_lambda(X: SimplicialComplex, m: WeightFunction, lam: Optional[float],
                    spectral: Optional[SpectralReport], measured_of,
                    tolerances: Tolerances, source: Optional[str]) -> Tuple[float, str, bool]:
    if lam is not None and lam < 0:
        raise ParameterError(f"lambda={lam} must be non-negative")
    if spectral is None:
        spectral = link_spectral_report(X, m, tolerances=tolerances)
    measured = measured_of(spectral)
    if lam is None:
        return measured, "measured", True
    verified = measured <= lam + tolerances.inequality
    if not verified:
        logger.warning("Supplied lambda %.6g is below the measured %.6g", lam, measured)
    return lam, source or "supplied", verified


def _regular_checks(m: WeightFunction, sets: Sequence[Tuple[int, ...]], lam: float,
                    C: float, tol: Tolerances) -> List[Check]:
    """Count and density forms in the K-regular homogeneous case."""
    X = m.complex
    n = X.n
    regularity = check_regularity(X, m)
    if regularity is None or regularity.K is None:
        return []
    K = regularity.K
    nf = factorial(n)
    count = int(spanning_mask(X, sets).sum())
    sizes = [len(u) for u in sets]
    N0, Nn = X.size(0), X.size(n)
    measure = float(m.level(n)[spanning_mask(X, sets)].sum())
    pair = min(sqrt(sizes[i] * sizes[j]) for i in range(n + 1) for j in range(i + 1, n + 1))
    checks = [
        Check.identity("regular.measure_is_count", measure, count, tol.identity),
        Check.identity("regular.total_vertex_weight", total_weight(m, 0), nf * K * N0,
                       tol.identity),
        Check.identity("regular.total_top_count", total_weight(m, 0),
                       factorial(n + 1) * Nn, tol.identity),
        Check.identity("regular.set_weights", [vertex_weights(m, u) for u in sets],
                       [nf * K * s for s in sizes], tol.identity),
        Check.inequality("regular.count_form",
                         abs(count - nf * K / N0 ** n * prod(sizes)),
                         C * nf * lam * K * pair, tol.inequality),
        Check.inequality("regular.density_form",
                         abs(count / Nn - factorial(n + 1) * prod(sizes) / N0 ** (n + 1)),
                         C * factorial(n + 1) * lam * pair / N0, tol.inequality),
    ]
    return checks


def verify_mixing(
    m: WeightFunction,
    vertex_sets: VertexSets,
    lam: Optional[float] = None,
    spectral: Optional[SpectralReport] = None,
    tolerances: Optional[Tolerances] = None,
    lam_source: Optional[str] = None,
    with_norms: bool = False,
) -> MixingReport:
    """|m(X(U_0..U_n)) - prod m(U_i)/m(X(0))^n| <= C_n lambda min_{i<j} sqrt(m(U_i) m(U_j))."""
    tolerances = tolerances or Tolerances()
    X = m.complex
    n = X.n
    if n < 1:
        raise ParameterError("Mixing needs a complex of dimension at least 1")
    given = _sets(X, vertex_sets)
    lam, source, verified = _resolve_lambda(X, m, lam, spectral,
                                            lambda s: s.lambda_two_sided(), tolerances,
                                            lam_source)
    weights = [vertex_weights(m, u) for u in given]
    sets = [given[i] for i in _min_pair_order(weights)]
    weights = [vertex_weights(m, u) for u in sets]
    algebra = CochainAlgebra(m)

    measure = float(m.level(n)[spanning_mask(X, sets)].sum())
    d = algebra.differential(n - 1)
    chi_left = algebra.spanning_indicator(sets[:n])
    chi_right = algebra.spanning_indicator(sets[1:])
    paired = algebra.inner_product(d(chi_left), d(chi_right))
    main = prod(weights) / total_weight(m, 0) ** n
    pair = sqrt(weights[0] * weights[n])

    levels = []
    for k in range(n):
        top, bottom = top_term(algebra, sets, k), bottom_term(algebra, sets, k)
        levels.append(LevelTerm(k=k, top=top, bottom=bottom, bracket=top - bottom,
                                bound=lam * level_constant(n, k) * pair))

    C = constant_C(n)
    report = MixingReport(
        title="Mixing", sets=[list(u) for u in sets], lam=lam, lam_source=source,
        hypothesis_verified=verified, measure=measure, main_term=main,
        lhs=abs(measure - main), rhs=C * lam * pair, constant=C, pair_term=pair,
        tolerance=tolerances.inequality, levels=levels,
    )
    report.checks.append(Check.identity("enumeration", paired, measure, tolerances.identity))
    report.checks.append(Check.identity("bottom_closed_form", levels[0].bottom, main,
                                        tolerances.identity))
    report.checks.append(Check.identity("top_level", levels[-1].top, measure,
                                        tolerances.identity))
    report.checks.append(Check.identity("telescoping", measure - levels[0].bottom,
                                        sum(t.bracket for t in levels), tolerances.accumulated))
    for t in levels:
        report.checks.append(Check.inequality(f"bracket_bound[k={t.k}]", abs(t.bracket),
                                              t.bound, tolerances.inequality))
    report.checks.extend(_regular_checks(m, sets, lam, C, tolerances))
    if with_norms:
        report.checks.extend(product_difference_norms(m, sets, lam))
    logger.info("Mixing: lhs=%.6g rhs=%.6g holds=%s", report.lhs, report.rhs, report.holds)
    return report


def _partite_regular_checks(m: WeightFunction, partite: PartiteStructure,
                            sets: Sequence[Tuple[int, ...]], sides: Sequence[Tuple[int, ...]],
                            lam: float, C: float, tol: Tolerances) -> List[Check]:
    X = m.complex
    n = X.n
    regularity = check_regularity(X, m, partite)
    if regularity is None or regularity.side_K is None:
        return []
    nf = factorial(n)
    side_K = {v: regularity.side_K[partite.side_of[v]] for v in X.vertices}
    count = int(spanning_mask(X, sets).sum())
    ratios = [len(u) / len(s) for u, s in zip(sets, sides)]
    pair = min(sqrt(ratios[i] * ratios[j]) for i in range(n + 1) for j in range(i + 1, n + 1))
    return [
        Check.identity("partite_regular.set_weights",
                       [vertex_weights(m, u) for u in sets],
                       [nf * side_K[u[0]] * len(u) if u else 0.0 for u in sets], tol.identity),
        Check.identity("partite_regular.side_weights",
                       [vertex_weights(m, s) for s in sides],
                       [nf * side_K[s[0]] * len(s) for s in sides], tol.identity),
        Check.inequality("partite_regular.count_form",
                         abs(count / X.size(n) - prod(ratios)), C * lam * pair, tol.inequality),
    ]


def verify_partite_mixing(
    m: WeightFunction,
    vertex_sets: VertexSets,
    lam: Optional[float] = None,
    partite: Optional[PartiteStructure] = None,
    spectral: Optional[SpectralReport] = None,
    tolerances: Optional[Tolerances] = None,
    lam_source: Optional[str] = None,
    with_norms: bool = False,
) -> MixingReport:
    """Side-normalized mixing for U_i inside S_i.

    |m(X(U))/m(X(n)) - prod m(U_i)/m(S_i)| <= C lambda min sqrt(m(U_i)m(U_j)/(m(S_i)m(S_j))).
    """
    tolerances = tolerances or Tolerances()
    X = m.complex
    n = X.n
    if n < 1:
        raise ParameterError("Mixing needs a complex of dimension at least 1")
    if partite is None:
        partite = detect_partite(X)
        if partite is None:
            raise PartiteError("Complex is not partite")
    given = _sets(X, vertex_sets)
    for i, u in enumerate(given):
        outside = [v for v in u if partite.side_of[v] != i]
        if outside:
            raise PartiteError(f"U_{i} has vertices {outside[:5]} outside S_{i}")
    lam, source, verified = _resolve_lambda(
        X, m, lam, spectral, lambda s: s.lambda_one_sided(partite_aware=True), tolerances,
        lam_source)

    side_weights = [vertex_weights(m, s) for s in partite.sides]
    ratios = [vertex_weights(m, u) / w for u, w in zip(given, side_weights)]
    order = _min_pair_order(ratios)
    sets = [given[i] for i in order]
    sides = [partite.sides[i] for i in order]
    weights = [vertex_weights(m, u) for u in sets]
    ratios = [ratios[i] for i in order]
    algebra = CochainAlgebra(m, partite)

    measure = float(m.level(n)[spanning_mask(X, sets)].sum())
    top_weight = total_weight(m, n)
    bottom_factor = (n + 1) ** n / factorial(n)
    pair = sqrt(weights[0] * weights[n])

    levels = []
    for k in range(n):
        top, bottom = top_term(algebra, sets, k), bottom_term(algebra, sets, k)
        bracket = top - partite_ratio(n, k) ** (n - k) * bottom
        levels.append(LevelTerm(k=k, top=top, bottom=bottom, bracket=bracket,
                                weight=telescoping_weight(n, k),
                                bound=lam * (n - k) * level_constant(n, k) * pair))

    C = constant_C_partite(n)
    product_ratio = prod(ratios)
    report = MixingReport(
        title="Partite mixing", partite=True, sets=[list(u) for u in sets], lam=lam,
        lam_source=source, hypothesis_verified=verified, measure=measure,
        main_term=product_ratio, lhs=abs(measure / top_weight - product_ratio),
        rhs=C * lam * sqrt(ratios[0] * ratios[n]), constant=C,
        pair_term=sqrt(ratios[0] * ratios[n]), tolerance=tolerances.inequality, levels=levels,
    )
    report.checks.append(Check.identity("bottom_closed_form", levels[0].bottom,
                                        bottom_closed_form(m, sets), tolerances.identity))
    report.checks.append(Check.identity(
        "partite_telescoping", measure - bottom_factor * levels[0].bottom,
        sum(t.weight * t.bracket for t in levels), tolerances.accumulated))
    report.checks.append(Check.identity(
        "side_normalization", (measure - bottom_factor * levels[0].bottom) / top_weight,
        measure / top_weight - product_ratio, tolerances.identity))
    for t in levels:
        report.checks.append(Check.inequality(f"bracket_bound[k={t.k}]", abs(t.bracket),
                                              t.bound, tolerances.inequality))
        report.checks.append(Check.inequality(f"weight_below_published[k={t.k}]", t.weight,
                                              published_weight(n, t.k), tolerances.inequality))
    report.checks.append(Check.diagnostic("constant_exact_weights", constant_C_partite_exact(n)))
    report.checks.extend(_partite_regular_checks(m, partite, sets, sides, lam, C, tolerances))
    if with_norms:
        report.checks.extend(product_difference_norms(m, sets, lam, partite=True))
    logger.info("Partite mixing: lhs=%.6g rhs=%.6g holds=%s",
                report.lhs, report.rhs, report.holds)
    return report


def random_disjoint_sets(X: SimplicialComplex, rng: np.random.Generator) -> List[Tuple[int, ...]]:
    """n+1 disjoint vertex sets; every vertex joins one set or none, uniformly."""
    labels = rng.integers(0, X.n + 2, size=X.size(0))
    return [tuple(v for v, label in zip(X.vertices, labels) if label == i)
            for i in range(X.n + 1)]


def random_side_subsets(partite: PartiteStructure,
                        rng: np.random.Generator) -> List[Tuple[int, ...]]:
    """U_i inside S_i, each vertex kept with probability 1/2."""
    return [tuple(v for v in side if rng.random() < 0.5) for side in partite.sides]


def verify_random_families(
    m: WeightFunction,
    families: int,
    seed: int = 0,
    lam: Optional[float] = None,
    partite: Optional[PartiteStructure] = None,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
    lam_source: Optional[str] = None,
) -> List[MixingReport]:
    """Mixing reports for random set families, one child stream per family."""
    if families < 1:
        raise ParameterError(f"families={families} must be at least 1")
    tolerances = tolerances or Tolerances()
    X = m.complex
    spectral = link_spectral_report(X, m, partite, tolerances, max_workers)
    rngs = spawn_generators(seed, families)

    if partite is not None:
        def run(rng):
            return verify_partite_mixing(m, random_side_subsets(partite, rng), lam, partite,
                                         spectral, tolerances, lam_source)
    else:
        def run(rng):
            return verify_mixing(m, random_disjoint_sets(X, rng), lam, spectral, tolerances,
                                 lam_source)

    reports = parallel_map(run, rngs, max_workers)
    logger.info("Verified %d random families, %d hold", len(reports),
                sum(r.holds for r in reports))
    return reports
