"""Affine extension of vertex maps, point depth and geometric overlap."""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg, optimize

from hdx_verifier.core.cochains import parallel_map, spawn_generators
from hdx_verifier.core.complex import SimplicialComplex
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import FormatError, ParameterError
from hdx_verifier.core.mixing import constant_C, constant_C_partite
from hdx_verifier.core.report import Check

logger = logging.getLogger(__name__)

VARIANTS = ("nonpartite", "partite")


@dataclass(frozen=True)
class PointMap:
    """One point of R^dimension per vertex."""

    points: Mapping[int, np.ndarray]
    dimension: int

    @classmethod
    def for_complex(
        cls, X: SimplicialComplex, points: Mapping[int, Sequence[float]]
    ) -> "PointMap":
        missing = [v for v in X.vertices if v not in points]
        if missing:
            raise FormatError(f"No point given for vertices {missing[:5]}")
        frozen = {v: np.asarray(points[v], dtype=float) for v in X.vertices}
        for v, p in frozen.items():
            if p.shape != (X.n,):
                raise FormatError(f"Point of vertex {v} has shape {p.shape}, expected ({X.n},)")
        return cls(frozen, X.n)

    def image(self, simplex: Iterable[int]) -> np.ndarray:
        """Rows f(v_0), ..., f(v_k)."""
        return np.array([self.points[v] for v in simplex]).reshape(-1, self.dimension)

    def transformed(self, matrix: np.ndarray, offset: Optional[np.ndarray] = None) -> "PointMap":
        offset = np.zeros(self.dimension) if offset is None else np.asarray(offset, dtype=float)
        return PointMap({v: matrix @ p + offset for v, p in self.points.items()}, self.dimension)

    def perturbed(self, rng: np.random.Generator, scale: float) -> "PointMap":
        return PointMap(
            {v: p + scale * rng.uniform(-1.0, 1.0, self.dimension)
             for v, p in sorted(self.points.items())},
            self.dimension,
        )

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        stacked = np.array(list(self.points.values())).reshape(-1, self.dimension)
        return stacked.min(axis=0), stacked.max(axis=0)

    def diameter(self) -> float:
        low, high = self.bounding_box()
        return float(np.linalg.norm(high - low))


def _barycentric_system(image: np.ndarray) -> np.ndarray:
    return np.vstack([image.T, np.ones(len(image))])


def _is_degenerate(image: np.ndarray, tolerance: float) -> bool:
    A = _barycentric_system(image)
    if A.shape[0] != A.shape[1]:
        return True
    return np.linalg.cond(A) * tolerance >= 1.0


def _contains(image: np.ndarray, points: np.ndarray, tolerance: float) -> np.ndarray:
    """Closed-hull membership of each row of ``points``."""
    A = _barycentric_system(image)
    b = np.vstack([points.T, np.ones(len(points))])
    if not _is_degenerate(image, tolerance):
        coefficients = linalg.solve(A, b)
        return np.all(coefficients >= -tolerance, axis=0)
    # affinely dependent image: nearest non-negative combination
    inside = np.zeros(len(points), dtype=bool)
    for j in range(len(points)):
        _, residual = optimize.nnls(A, b[:, j])
        inside[j] = residual <= tolerance * (1.0 + np.linalg.norm(b[:, j]))
    return inside


def point_in_image(simplex: Sequence[int], f: PointMap, x: Sequence[float],
                   tolerance: float = 1e-9) -> bool:
    if len(simplex) != f.dimension + 1:
        raise ParameterError(f"Expected an {f.dimension}-simplex, got {tuple(simplex)}")
    point = np.asarray(x, dtype=float).reshape(1, f.dimension)
    return bool(_contains(f.image(simplex), point, tolerance)[0])


def depths(X: SimplicialComplex, f: PointMap, points: np.ndarray,
           tolerance: float = 1e-9, max_workers: Optional[int] = None) -> np.ndarray:
    """Number of top-simplex images containing each point."""
    points = np.asarray(points, dtype=float).reshape(-1, f.dimension)
    hits = parallel_map(lambda s: _contains(f.image(s), points, tolerance),
                        X.top_simplices, max_workers)
    return np.sum(hits, axis=0, dtype=int) if hits else np.zeros(len(points), dtype=int)


def depth(X: SimplicialComplex, f: PointMap, x: Sequence[float], tolerance: float = 1e-9) -> int:
    return int(depths(X, f, np.asarray(x, dtype=float), tolerance)[0])


def overlap_bound(lam: float, n: int, pach_constant: float, variant: str = "nonpartite") -> float:
    """Overlap lower bound from lambda and the selection constant P_n."""
    if not 0 < pach_constant <= 1:
        raise ParameterError(f"Selection constant {pach_constant} must lie in (0, 1]")
    if lam < 0:
        raise ParameterError(f"lambda={lam} must be non-negative")
    if variant == "nonpartite":
        return factorial(n) * pach_constant * (
            (pach_constant / (n + 1)) ** n - (n + 1) * constant_C(n) * lam
        )
    if variant == "partite":
        return pach_constant * (pach_constant ** n - constant_C_partite(n) * lam)
    raise ParameterError(f"Unknown variant {variant!r}, expected one of {VARIANTS}")


class OverlapReport(BaseModel):
    """Deepest point found for one vertex map, with the optional lower bound."""

    title: str = "Overlap"
    method: str
    witness: List[float]
    depth: int
    top_count: int
    candidates: int = 0
    degenerate: bool = False
    perturbed: bool = False
    lam: Optional[float] = None
    pach: Optional[float] = None
    variant: Optional[str] = None
    bound: Optional[float] = None
    assert_bound: bool = False
    tolerance: float = 1e-9
    checks: List[Check] = Field(default_factory=list)

    @property
    def overlap(self) -> float:
        return self.depth / self.top_count if self.top_count else 0.0

    @property
    def bound_holds(self) -> Optional[bool]:
        """None when no bound was given or the bound is not positive."""
        if self.bound is None or self.bound <= 0:
            return None
        return self.overlap >= self.bound - self.tolerance

    @property
    def passed(self) -> bool:
        if self.assert_bound and self.bound_holds is False:
            return False
        return all(c.passed for c in self.checks)

    def items(self) -> Dict[str, Any]:
        return {
            "PASSED": self.passed,
            "METHOD": self.method,
            "DEPTH": self.depth,
            "TOP_SIMPLICES": self.top_count,
            "OVERLAP": self.overlap,
            "WITNESS": self.witness,
            "DEGENERATE": self.degenerate,
            "PERTURBED": self.perturbed,
            "BOUND": self.bound,
            "BOUND_HOLDS": self.bound_holds,
        }


def with_bound(report: OverlapReport, lam: float, pach_constant: float,
               variant: str = "nonpartite", assert_bound: bool = False,
               n: Optional[int] = None) -> OverlapReport:
    """Attach the lower bound; it is asserted only when ``assert_bound`` is set."""
    n = len(report.witness) if n is None else n
    bound = overlap_bound(lam, n, pach_constant, variant)
    updated = report.model_copy(update={
        "lam": lam, "pach": pach_constant, "variant": variant, "bound": bound,
        "assert_bound": assert_bound,
    })
    if updated.bound_holds is False:
        logger.warning("Overlap %.6g is below the bound %.6g", updated.overlap, bound)
    return updated


def _general_position(f: PointMap, tolerance: float) -> bool:
    """No two image points coincide and no three are collinear."""
    scale = max(1.0, f.diameter())
    points = [f.points[v] for v in sorted(f.points)]
    for p, q in combinations(points, 2):
        if np.linalg.norm(p - q) <= tolerance * scale:
            return False
    for p, q, r in combinations(points, 3):
        u, w = q - p, r - p
        if abs(u[0] * w[1] - u[1] * w[0]) <= tolerance * scale * scale:
            return False
    return True


def _segment_crossing(p: np.ndarray, r: np.ndarray, q: np.ndarray,
                      s: np.ndarray) -> Optional[np.ndarray]:
    """Interior crossing of p + t r and q + u s, if any."""
    denominator = r[0] * s[1] - r[1] * s[0]
    if denominator == 0:
        return None
    diff = q - p
    t = (diff[0] * s[1] - diff[1] * s[0]) / denominator
    u = (diff[0] * r[1] - diff[1] * r[0]) / denominator
    if 0 < t < 1 and 0 < u < 1:
        return p + t * r
    return None


def _nudges(center: np.ndarray, directions: Sequence[np.ndarray], eps: float) -> List[np.ndarray]:
    """One point inside each open sector cut out by ``directions`` around ``center``."""
    angles = sorted({float(np.arctan2(d[1], d[0])) for d in directions})
    if not angles:
        return [center]
    wrapped = angles + [angles[0] + 2 * np.pi]
    return [center + eps * np.array([np.cos(a), np.sin(a)])
            for a in ((lo + hi) / 2 for lo, hi in zip(wrapped, wrapped[1:]))]


def arrangement_candidates(X: SimplicialComplex, f: PointMap, nudge: float = 1e-7) -> np.ndarray:
    """Points inside every open cell of the planar arrangement of image edges."""
    eps = nudge * max(1.0, f.diameter())
    edges = X.simplices(1)
    incident: Dict[int, List[np.ndarray]] = {v: [] for v in X.vertices}
    for u, v in edges:
        incident[u].append(f.points[v] - f.points[u])
        incident[v].append(f.points[u] - f.points[v])

    candidates: List[np.ndarray] = []
    for v, directions in incident.items():
        candidates.extend(_nudges(f.points[v], directions, eps))
    for (a, b), (c, d) in combinations(edges, 2):
        if len({a, b, c, d}) < 4:
            continue
        r = f.points[b] - f.points[a]
        s = f.points[d] - f.points[c]
        crossing = _segment_crossing(f.points[a], r, f.points[c], s)
        if crossing is not None:
            candidates.extend(_nudges(crossing, [r, -r, s, -s], eps))
    candidates.extend(f.image(s).mean(axis=0) for s in X.top_simplices)
    return np.array(candidates).reshape(-1, 2)


def overlap_exact_2d(
    X: SimplicialComplex,
    f: PointMap,
    tolerances: Optional[Tolerances] = None,
    seed: int = 0,
    nudge: float = 1e-7,
    max_workers: Optional[int] = None,
) -> OverlapReport:
    """Maximum depth over the open cells of the edge arrangement of a planar map."""
    tolerances = tolerances or Tolerances()
    if X.n != 2 or f.dimension != 2:
        raise ParameterError(f"Exact overlap needs a 2-complex mapped to the plane, got n={X.n}")
    perturbed = False
    if not _general_position(f, tolerances.geometry):
        logger.warning("Image points are not in general position; perturbing by 1e-9")
        f = f.perturbed(spawn_generators(seed, 1)[0], 1e-9 * max(1.0, f.diameter()))
        perturbed = True
    degenerate = any(_is_degenerate(f.image(s), tolerances.geometry) for s in X.top_simplices)

    candidates = arrangement_candidates(X, f, nudge)
    counts = depths(X, f, candidates, tolerances.geometry, max_workers)
    best = int(np.argmax(counts))
    logger.info("Exact overlap: %d candidates, max depth %d", len(candidates), counts[best])
    return OverlapReport(
        method="exact-2d", witness=candidates[best].tolist(), depth=int(counts[best]),
        top_count=X.size(2), candidates=len(candidates), degenerate=degenerate,
        perturbed=perturbed, tolerance=tolerances.inequality,
    )


def overlap_sampled(
    X: SimplicialComplex,
    f: PointMap,
    num_points: int,
    seed: int = 0,
    tolerances: Optional[Tolerances] = None,
    max_workers: Optional[int] = None,
) -> OverlapReport:
    """Maximum depth over uniform samples of the bounding box and every image centroid."""
    tolerances = tolerances or Tolerances()
    if num_points < 0:
        raise ParameterError(f"num_points={num_points} must be non-negative")
    if X.n < 1:
        raise ParameterError("Sampled overlap needs a complex of dimension at least 1")
    rng = spawn_generators(seed, 1)[0]
    low, high = f.bounding_box()
    samples = rng.uniform(low, high, size=(num_points, f.dimension))
    centroids = np.array([f.image(s).mean(axis=0) for s in X.top_simplices])
    points = np.vstack([samples, centroids.reshape(-1, f.dimension)])
    counts = depths(X, f, points, tolerances.geometry, max_workers)
    best = int(np.argmax(counts))
    degenerate = any(_is_degenerate(f.image(s), tolerances.geometry) for s in X.top_simplices)
    return OverlapReport(
        method="sampled", witness=points[best].tolist(), depth=int(counts[best]),
        top_count=X.size(X.n), candidates=len(points), degenerate=degenerate,
        tolerance=tolerances.inequality,
    )


def random_affine_map(rng: np.random.Generator, dimension: int) -> Tuple[np.ndarray, np.ndarray]:
    """A random invertible affine map of R^dimension."""
    while True:
        matrix = rng.standard_normal((dimension, dimension))
        if abs(np.linalg.det(matrix)) > 0.1:
            return matrix, rng.standard_normal(dimension)
