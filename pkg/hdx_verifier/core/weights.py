"""Balanced weight functions, weighted links and regularity."""

import logging
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from hdx_verifier.core.complex import (
    EMPTY,
    PartiteStructure,
    Simplex,
    SimplicialComplex,
    detect_partite,
    link_complex,
)
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import HDXError, WeightError
from hdx_verifier.core.report import Check, IdentityReport

logger = logging.getLogger(__name__)

BALANCE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A positive balanced weight m on every simplex of ``complex``.

    ``levels[k + 1]`` holds m on X(k) in the complex's index order.
    """

    complex: SimplicialComplex
    levels: Tuple[np.ndarray, ...]

    def __post_init__(self):
        X = self.complex
        if len(self.levels) != X.n + 2:
            raise WeightError(f"Expected {X.n + 2} weight levels, got {len(self.levels)}")
        frozen = []
        for k in range(-1, X.n + 1):
            values = np.array(self.levels[k + 1], dtype=float)
            if values.shape != (X.size(k),):
                raise WeightError(f"Level {k} has {values.shape} weights for {X.size(k)} simplices")
            if not np.all(values > 0):
                raise WeightError(f"Non-positive weight at level {k}")
            values.flags.writeable = False
            frozen.append(values)
        object.__setattr__(self, "levels", tuple(frozen))
        residual = balance_residual(self)
        if residual > BALANCE_TOLERANCE:
            raise WeightError(f"Weight function is not balanced (relative residual {residual:.3g})")

    @property
    def n(self) -> int:
        return self.complex.n

    def level(self, k: int) -> np.ndarray:
        """m restricted to X(k) as a read-only vector."""
        self.complex.size(k)
        return self.levels[k + 1]

    def __call__(self, simplex: Iterable[int]) -> float:
        s = tuple(sorted(simplex))
        return float(self.levels[len(s)][self.complex.index_of(s)])

    def is_homogeneous(self) -> bool:
        return bool(np.all(self.level(self.n) == 1.0))

    def scaled(self, factor: float) -> "WeightFunction":
        return WeightFunction(self.complex, tuple(level * factor for level in self.levels))


def coface_sums(X: SimplicialComplex, upper: np.ndarray, k: int) -> np.ndarray:
    """For each tau in X(k), the sum of ``upper`` over its (k+1)-cofaces."""
    out = np.zeros(X.size(k))
    for j in range(X.size(k + 1)):
        out[X.boundary(k + 1, j)] += upper[j]
    return out


def balance_residual(m: WeightFunction) -> float:
    X = m.complex
    worst = 0.0
    for k in range(-1, X.n):
        lower = m.levels[k + 1]
        sums = coface_sums(X, m.levels[k + 2], k)
        worst = max(worst, float(np.max(np.abs(lower - sums) / np.abs(lower))))
    return worst


def weight_from_top(
    X: SimplicialComplex, top_weights: Union[Sequence[float], Mapping[Simplex, float], np.ndarray]
) -> WeightFunction:
    """Extend positive weights on X(n) to all levels by the balance recursion."""
    if isinstance(top_weights, Mapping):
        missing = [t for t in X.top_simplices if tuple(sorted(t)) not in top_weights]
        if missing:
            raise WeightError(f"No weight for top simplices {missing[:3]}")
        top = np.array([top_weights[t] for t in X.top_simplices], dtype=float)
    else:
        top = np.asarray(top_weights, dtype=float)
    if top.shape != (X.size(X.n),):
        raise WeightError(f"Expected {X.size(X.n)} top weights, got {top.shape}")
    if not np.all(top > 0):
        raise WeightError("Top weights must be positive")

    levels = [top]
    for k in range(X.n - 1, -2, -1):
        levels.append(coface_sums(X, levels[-1], k))
    return WeightFunction(X, tuple(reversed(levels)))


def homogeneous_weight(X: SimplicialComplex) -> WeightFunction:
    """The weight induced by m(sigma) = 1 on every n-simplex."""
    return weight_from_top(X, np.ones(X.size(X.n)))


def total_weight(m: WeightFunction, k: int) -> float:
    """m(X(k))."""
    return float(m.level(k).sum())


def weight_of_set(m: WeightFunction, simplices: Iterable[Iterable[int]]) -> float:
    """m(U) for a set U of simplices of one level; the empty set weighs 0."""
    return float(sum(m(s) for s in simplices))


def vertex_weights(m: WeightFunction, vertices: Iterable[int]) -> float:
    """m(U) for a vertex set U given by ids."""
    return weight_of_set(m, ((v,) for v in vertices))


def link(
    X: SimplicialComplex, m: WeightFunction, tau: Iterable[int]
) -> Tuple[SimplicialComplex, WeightFunction]:
    """The link X_tau with the induced weight m_tau(eta) = m(tau | eta)."""
    t = tuple(sorted(tau))
    if t == EMPTY:
        return X, m
    X_tau = link_complex(X, t)
    levels = []
    for l in range(-1, X_tau.n + 1):
        levels.append(np.array([m(t + eta) for eta in X_tau.simplices(l)]))
    return X_tau, WeightFunction(X_tau, tuple(levels))


@dataclass(frozen=True)
class Regularity:
    """K-regularity, and per-side K_i in the partite case."""

    K: Optional[int] = None
    side_K: Optional[Tuple[int, ...]] = None


def check_regularity(
    X: SimplicialComplex, m: WeightFunction, partite: Optional[PartiteStructure] = None
) -> Optional[Regularity]:
    """Degrees of vertices in n-simplices under the homogeneous weight, or None."""
    if not m.is_homogeneous():
        logger.debug("Regularity is only defined for the homogeneous weight")
        return None
    scale = factorial(X.n)
    counts = {}
    for (v,), weight in zip(X.simplices(0), m.level(0)):
        count = int(round(weight / scale))
        if abs(weight - scale * count) > 1e-9 * weight:
            return None
        counts[v] = count

    values = set(counts.values())
    K = values.pop() if len(values) == 1 else None

    if partite is None:
        try:
            partite = detect_partite(X)
        except HDXError:
            partite = None
    side_K = None
    if partite is not None:
        per_side = [{counts[v] for v in side} for side in partite.sides]
        if all(len(s) == 1 for s in per_side):
            side_K = tuple(s.pop() for s in per_side)

    if K is None and side_K is None:
        return None
    return Regularity(K=K, side_K=side_K)


def _containment(X: SimplicialComplex, k: int, l: int) -> np.ndarray:
    """Boolean |X(k)| x |X(l)| matrix of tau subset-of sigma."""
    vertices = {v: i for i, v in enumerate(X.vertices)}
    def rows(level):
        mat = np.zeros((X.size(level), len(vertices)), dtype=bool)
        for j, s in enumerate(X.simplices(level)):
            mat[j, [vertices[v] for v in s]] = True
        return mat
    low, high = rows(k), rows(l)
    # tau inside sigma iff every vertex of tau is a vertex of sigma
    return (low.astype(int) @ high.T.astype(int)) == (k + 1)


def verify_weight_identities(
    m: WeightFunction,
    partite: Optional[PartiteStructure] = None,
    tolerances: Optional[Tolerances] = None,
) -> IdentityReport:
    """Balance, coface-count identities and the total-weight ratio identity."""
    tol = (tolerances or Tolerances()).identity
    X = m.complex
    n = X.n
    report = IdentityReport(title="Weight identities")

    for k in range(-1, n):
        report.add(Check.identity(f"balance[k={k}]", m.level(k),
                                  coface_sums(X, m.level(k + 1), k), tol))

    for k in range(-1, n + 1):
        for l in range(k + 1, n + 1):
            contained = _containment(X, k, l)
            sums = contained.astype(float) @ m.level(l)
            report.add(Check.identity(f"coface_sum[k={k},l={l}]",
                                      m.level(k) / factorial(l - k), sums, tol))
            report.add(Check.identity(
                f"total_ratio[k={k},l={l}]", total_weight(m, k),
                factorial(l + 1) / factorial(k + 1) * total_weight(m, l), tol))

    if partite is not None:
        report.merge(verify_partite_weights(m, partite, tolerances))
    logger.info("Weight identities: %d checks, passed=%s", len(report.checks), report.passed)
    return report


def verify_partite_weights(
    m: WeightFunction, partite: PartiteStructure, tolerances: Optional[Tolerances] = None
) -> IdentityReport:
    """Side-restricted coface sums and m(S_i) = m(X(0))/(n+1)."""
    tol = (tolerances or Tolerances()).identity
    X = m.complex
    n = X.n
    report = IdentityReport(title="Partite weight identities")
    side_of = partite.side_of
    for k in range(-1, n):
        upper = X.simplices(k + 1)
        for i in range(n + 1):
            hits = np.array([any(side_of[v] == i for v in s) for s in upper])
            sums = coface_sums(X, np.where(hits, m.level(k + 1), 0.0), k)
            expected = np.array([
                m.level(k)[j] if any(side_of[v] == i for v in tau) else m.level(k)[j] / (n - k)
                for j, tau in enumerate(X.simplices(k))
            ])
            report.add(Check.identity(f"side_coface_sum[k={k},i={i}]", sums, expected, tol))
    for i, side in enumerate(partite.sides):
        report.add(Check.identity(f"side_weight[i={i}]", vertex_weights(m, side),
                                  total_weight(m, 0) / (n + 1), tol))
    return report
