"""Weighted cochain spaces, signless differentials and random-walk operators.

Every operator is a dense matrix in the simplex-index bases of the complex.
A k-cochain is a vector indexed like ``X.simplices(k)``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, TypeVar

import numpy as np
from scipy import linalg

from hdx_verifier.core.complex import PartiteStructure, SimplicialComplex, spanning_mask
from hdx_verifier.core.config import Tolerances
from hdx_verifier.core.errors import LevelError, PartiteError
from hdx_verifier.core.report import Check, IdentityReport
from hdx_verifier.core.weights import WeightFunction

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child streams of one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def parallel_map(fn: Callable[[T], R], items: Iterable[T],
                 max_workers: Optional[int] = None) -> List[R]:
    """Order-preserving thread-pool map."""
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(fn, items))


@dataclass(frozen=True, eq=False)
class Cochain:
    """Real values on X(level), in index order."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __add__(self, other: "Cochain") -> "Cochain":
        _same_level(self, other)
        return Cochain(self.level, self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        _same_level(self, other)
        return Cochain(self.level, self.values - other.values)

    def __mul__(self, scalar: float) -> "Cochain":
        return Cochain(self.level, self.values * float(scalar))

    __rmul__ = __mul__


def _same_level(phi: Cochain, psi: Cochain) -> None:
    if phi.level != psi.level:
        raise LevelError(f"Cochain levels differ: {phi.level} vs {psi.level}")


@dataclass(frozen=True, eq=False)
class LinearOperatorHandle:
    """A dense operator C^domain -> C^codomain."""

    name: str
    domain: int
    codomain: int
    matrix: np.ndarray
    self_adjoint: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    def __call__(self, phi: Cochain) -> Cochain:
        if phi.level != self.domain:
            raise LevelError(f"{self.name} acts on level {self.domain}, got level {phi.level}")
        return Cochain(self.codomain, self.matrix @ phi.values)

    def __matmul__(self, other: "LinearOperatorHandle") -> "LinearOperatorHandle":
        if other.codomain != self.domain:
            raise LevelError(f"Cannot compose {self.name} after {other.name}")
        return LinearOperatorHandle(f"{self.name}*{other.name}", other.domain, self.codomain,
                                    self.matrix @ other.matrix)


class CompositionCheck(NamedTuple):
    dstar_d: LinearOperatorHandle
    d_dstar: LinearOperatorHandle
    report: IdentityReport


def adjoint_residual(matrix: np.ndarray, weights: np.ndarray) -> float:
    """Relative asymmetry of diag(m) A, zero iff A is self-adjoint for <.,.>_m."""
    weighted = weights[:, None] * matrix
    scale = 1.0 + float(np.max(np.abs(weighted))) if weighted.size else 1.0
    return float(np.max(np.abs(weighted - weighted.T))) / scale if weighted.size else 0.0


def symmetrize(matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """diag(sqrt m) A diag(1/sqrt m), symmetric when A is m-self-adjoint."""
    root = np.sqrt(weights)
    sym = root[:, None] * matrix / root[None, :]
    return (sym + sym.T) / 2


class CochainAlgebra:
    """Operators on the cochains of one weighted complex, assembled on demand."""

    def __init__(self, m: WeightFunction, partite: Optional[PartiteStructure] = None):
        self.m = m
        self.complex: SimplicialComplex = m.complex
        self.partite = partite
        self._cache: Dict[Tuple[str, int], LinearOperatorHandle] = {}

    @property
    def n(self) -> int:
        return self.complex.n

    def _cached(self, key: Tuple[str, int],
                build: Callable[[], LinearOperatorHandle]) -> LinearOperatorHandle:
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def _require(self, k: int, low: int, high: int, what: str) -> None:
        if not low <= k <= high:
            raise LevelError(f"{what} is defined for {low} <= k <= {high}, got k={k}")

    # cochains

    def cochain(self, k: int, values: Sequence[float]) -> Cochain:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.complex.size(k),):
            raise LevelError(
                f"Expected {self.complex.size(k)} values on X({k}), got {values.shape}"
            )
        return Cochain(k, values)

    def zero(self, k: int) -> Cochain:
        return Cochain(k, np.zeros(self.complex.size(k)))

    def constant(self, k: int, value: float = 1.0) -> Cochain:
        return Cochain(k, np.full(self.complex.size(k), float(value)))

    def indicator(self, k: int, simplices: Iterable[Iterable[int]]) -> Cochain:
        values = np.zeros(self.complex.size(k))
        for s in simplices:
            values[self.complex.index_of(s)] = 1.0
        return Cochain(k, values)

    def spanning_indicator(self, vertex_sets: Sequence[Iterable[int]]) -> Cochain:
        """chi of X(U_0,...,U_k)."""
        mask = spanning_mask(self.complex, vertex_sets)
        return Cochain(len(vertex_sets) - 1, mask.astype(float))

    def random_cochain(self, k: int, rng: np.random.Generator) -> Cochain:
        return Cochain(k, rng.standard_normal(self.complex.size(k)))

    def inner_product(self, phi: Cochain, psi: Cochain) -> float:
        """<phi, psi> = sum_sigma m(sigma) phi(sigma) psi(sigma)."""
        _same_level(phi, psi)
        return float(np.dot(self.m.level(phi.level) * phi.values, psi.values))

    def norm(self, phi: Cochain) -> float:
        return float(np.sqrt(max(self.inner_product(phi, phi), 0.0)))

    def orthogonalize(self, psi: Cochain, phi: Cochain) -> Cochain:
        """psi minus its m-weighted projection on phi."""
        norm2 = self.inner_product(phi, phi)
        if norm2 == 0.0:
            return psi
        return psi - phi * (self.inner_product(psi, phi) / norm2)

    # differentials

    def differential(self, k: int) -> LinearOperatorHandle:
        """Signless d_k: C^k -> C^{k+1}, summing over all k-faces."""
        self._require(k, -1, self.n - 1, "d_k")

        def build():
            X = self.complex
            matrix = np.zeros((X.size(k + 1), X.size(k)))
            for j in range(X.size(k + 1)):
                matrix[j, X.boundary(k + 1, j)] = 1.0
            return LinearOperatorHandle(f"d_{k}", k, k + 1, matrix)

        return self._cached(("d", k), build)

    def codifferential(self, k: int) -> LinearOperatorHandle:
        """d*_k: C^{k+1} -> C^k, (d*psi)(tau) = sum_{sigma > tau} m(sigma)/m(tau) psi(sigma)."""
        self._require(k, -1, self.n - 1, "d*_k")

        def build():
            d = self.differential(k).matrix
            matrix = d.T * self.m.level(k + 1)[None, :] / self.m.level(k)[:, None]
            return LinearOperatorHandle(f"d*_{k}", k + 1, k, matrix)

        return self._cached(("dstar", k), build)

    def d(self, phi: Cochain) -> Cochain:
        return self.differential(phi.level)(phi)

    def dstar(self, psi: Cochain) -> Cochain:
        return self.codifferential(psi.level - 1)(psi)

    # walks

    def upper_walk(self, k: int) -> LinearOperatorHandle:
        """M+_k: stay with probability 1/(k+2), else move through a shared (k+1)-coface."""
        self._require(k, 0, self.n - 1, "M+_k")

        def build():
            X, m = self.complex, self.m
            mk, mk1 = m.level(k), m.level(k + 1)
            matrix = np.eye(X.size(k)) / (k + 2)
            for j in range(X.size(k + 1)):
                faces = X.boundary(k + 1, j)
                for a in faces:
                    for b in faces:
                        if a != b:
                            matrix[a, b] += mk1[j] / ((k + 2) * mk[a])
            return LinearOperatorHandle(f"M+_{k}", k, k, matrix, self_adjoint=True)

        return self._cached(("upper", k), build)

    def lower_walk(self, k: int) -> LinearOperatorHandle:
        """M-_k: pick a (k-1)-face, then a coface of it in proportion to weight."""
        self._require(k, 0, self.n, "M-_k")

        def build():
            X, m = self.complex, self.m
            mk, mk_1 = m.level(k), m.level(k - 1)
            matrix = np.zeros((X.size(k), X.size(k)))
            for a in range(X.size(k)):
                for eta in X.boundary(k, a):
                    cof = X.cofaces(k - 1, int(eta))
                    matrix[a, cof] += mk[cof] / ((k + 1) * mk_1[eta])
            return LinearOperatorHandle(f"M-_{k}", k, k, matrix, self_adjoint=True)

        return self._cached(("lower", k), build)

    def nonlazy_upper(self, k: int) -> LinearOperatorHandle:
        """(M')+_k = ((k+2)/(k+1)) M+_k - I/(k+1)."""
        self._require(k, 0, self.n - 1, "(M')+_k")

        def build():
            upper = self.upper_walk(k).matrix
            matrix = (k + 2) / (k + 1) * upper - np.eye(upper.shape[0]) / (k + 1)
            return LinearOperatorHandle(f"M'+_{k}", k, k, matrix, self_adjoint=True)

        return self._cached(("nonlazy", k), build)

    def lower_zero_value(self, phi: Cochain) -> float:
        """The constant value of M-_0 phi: sum_v m(v) phi(v) / m(X(0))."""
        if phi.level != 0:
            raise LevelError("M-_0 acts on 0-cochains")
        m0 = self.m.level(0)
        return float(np.dot(m0, phi.values) / m0.sum())

    def compose_check_dstar_d(self, k: int,
                              tolerances: Optional[Tolerances] = None) -> CompositionCheck:
        """d*_k d_k and d_{k-1} d*_{k-1}, checked against (k+2) M+_k and (k+1) M-_k."""
        self._require(k, 0, self.n - 1, "d*d composition")
        tol = (tolerances or Tolerances()).identity
        report = IdentityReport(title=f"Walk compositions at k={k}")
        weights = self.m.level(k)

        dstar_d = self.codifferential(k) @ self.differential(k)
        d_dstar = self.differential(k - 1) @ self.codifferential(k - 1)
        report.add(Check.identity(f"dstar_d[k={k}]", dstar_d.matrix,
                                  (k + 2) * self.upper_walk(k).matrix, tol))
        report.add(Check.identity(f"d_dstar[k={k}]", d_dstar.matrix,
                                  (k + 1) * self.lower_walk(k).matrix, tol))
        top_up = linalg.eigvalsh(symmetrize(dstar_d.matrix, weights))[-1]
        top_down = linalg.eigvalsh(symmetrize(d_dstar.matrix, weights))[-1]
        report.add(Check.identity(f"norm_dstar_d[k={k}]", top_up, k + 2, tol))
        report.add(Check.identity(f"norm_d_dstar[k={k}]", top_down, k + 1, tol))
        return CompositionCheck(dstar_d, d_dstar, report)

    # projections

    def set_projection(self, vertex_sets: Sequence[Iterable[int]]) -> LinearOperatorHandle:
        """P_{X(U_0,...,U_k)}: keep coordinates of simplices spanning the sets."""
        mask = spanning_mask(self.complex, vertex_sets)
        k = len(vertex_sets) - 1
        return LinearOperatorHandle(f"P[k={k}]", k, k, np.diag(mask.astype(float)),
                                    self_adjoint=True)

    def partite_projection(self) -> LinearOperatorHandle:
        """M^{-,p}_0: orthogonal projection on span{chi_{S_0},...,chi_{S_n}}."""
        if self.partite is None:
            raise PartiteError("Partite projection needs a partite structure")

        def build():
            X = self.complex
            m0 = self.m.level(0)
            sides = np.array([self.partite.side_of[v] for v in X.vertices])
            same = sides[:, None] == sides[None, :]
            side_weight = np.array([m0[sides == sides[a]].sum() for a in range(len(sides))])
            matrix = np.where(same, m0[None, :] / side_weight[:, None], 0.0)
            return LinearOperatorHandle("M-p_0", 0, 0, matrix, self_adjoint=True)

        return self._cached(("partite", 0), build)

    def side_function(self, i: int) -> Cochain:
        """phi_i: n on S_i and -1 elsewhere."""
        if self.partite is None:
            raise PartiteError("Side functions need a partite structure")
        mask = self.partite.side_mask(self.complex, i)
        return Cochain(0, np.where(mask, float(self.n), -1.0))


def verify_operator_identities(
    m: WeightFunction,
    partite: Optional[PartiteStructure] = None,
    tolerances: Optional[Tolerances] = None,
    trials: int = 5,
    seed: int = 0,
) -> IdentityReport:
    """Stochasticity, self-adjointness, adjointness and walk composition identities."""
    tolerances = tolerances or Tolerances()
    algebra = CochainAlgebra(m, partite)
    n = algebra.n
    report = IdentityReport(title="Operator identities")

    walks: List[LinearOperatorHandle] = []
    for k in range(0, n):
        walks += [algebra.upper_walk(k), algebra.nonlazy_upper(k)]
    walks += [algebra.lower_walk(k) for k in range(0, n + 1)]
    for op in walks:
        rows = op.matrix.sum(axis=1)
        report.add(Check.identity(f"row_sum[{op.name}]", rows, np.ones_like(rows),
                                  tolerances.stochastic))
        residual = adjoint_residual(op.matrix, m.level(op.domain))
        report.add(Check(name=f"self_adjoint[{op.name}]", residual=residual,
                         tolerance=tolerances.self_adjoint,
                         passed=residual <= tolerances.self_adjoint))

    rngs = spawn_generators(seed, trials)
    for k in range(-1, n):
        def adjointness(rng, k=k):
            phi = algebra.random_cochain(k, rng)
            psi = algebra.random_cochain(k + 1, rng)
            return (algebra.inner_product(algebra.d(phi), psi),
                    algebra.inner_product(phi, algebra.dstar(psi)))
        pairs = parallel_map(adjointness, rngs)
        report.add(Check.identity(f"adjoint[k={k}]", [p[0] for p in pairs],
                                  [p[1] for p in pairs], tolerances.identity))

    for k in range(0, n):
        report.merge(algebra.compose_check_dstar_d(k, tolerances).report)

    m0 = m.level(0)
    report.add(Check.identity("lower_zero_rank_one", algebra.lower_walk(0).matrix,
                              np.outer(np.ones_like(m0), m0 / m0.sum()), tolerances.identity))

    if partite is not None and n >= 1:
        report.merge(_verify_partite_operators(algebra, tolerances, rngs))

    logger.info("Operator identities: %d checks, passed=%s", len(report.checks), report.passed)
    return report


def _verify_partite_operators(algebra: CochainAlgebra, tolerances: Tolerances,
                              rngs: Sequence[np.random.Generator]) -> IdentityReport:
    n = algebra.n
    tol = tolerances.identity
    report = IdentityReport(title="Partite operator identities")
    walk = algebra.nonlazy_upper(0)
    proj = algebra.partite_projection()

    for i in range(n + 1):
        phi = algebra.side_function(i)
        report.add(Check.identity(f"side_eigenfunction[i={i}]", walk(phi).values,
                                  -phi.values / n, tol))

    p = proj.matrix
    report.add(Check.identity("partite_projection_idempotent", p @ p, p, tol))
    report.add(Check(name="partite_projection_self_adjoint",
                     residual=adjoint_residual(p, algebra.m.level(0)),
                     tolerance=tolerances.self_adjoint,
                     passed=adjoint_residual(p, algebra.m.level(0)) <= tolerances.self_adjoint))
    report.add(Check.identity("partite_projection_commutes", walk.matrix @ p, p @ walk.matrix, tol))

    for i in range(n + 1):
        mask = algebra.partite.side_mask(algebra.complex, i)
        projected, expected, walked, walked_expected = [], [], [], []
        for rng in rngs:
            phi = algebra.cochain(0, np.where(mask, rng.standard_normal(mask.size), 0.0))
            value = algebra.lower_zero_value(phi)
            projected.append(proj(phi).values)
            expected.append((n + 1) * value * mask)
            walked.append(walk(proj(phi)).values)
            walked_expected.append(np.where(mask, 0.0, (n + 1) / n * value))
        report.add(Check.identity(f"partite_projection_side[i={i}]", projected, expected, tol))
        report.add(Check.identity(f"walk_after_partite_projection[i={i}]", walked,
                                  walked_expected, tol))
    return report


def dump_operators(algebra: CochainAlgebra, directory: Path) -> List[Path]:
    """Write every walk and differential matrix as plain text for inspection."""
    directory.mkdir(parents=True, exist_ok=True)
    ops = [algebra.differential(k) for k in range(-1, algebra.n)]
    ops += [algebra.upper_walk(k) for k in range(0, algebra.n)]
    ops += [algebra.nonlazy_upper(k) for k in range(0, algebra.n)]
    ops += [algebra.lower_walk(k) for k in range(0, algebra.n + 1)]
    if algebra.partite is not None:
        ops.append(algebra.partite_projection())
    written = []
    for op in ops:
        safe = op.name.replace("*", "star").replace("'", "prime").replace("+", "plus")
        path = directory / f"{safe.replace('-', 'minus')}.txt"
        np.savetxt(path, op.matrix, fmt="%.17g")
        written.append(path)
    logger.debug("Wrote %d operator matrices to %s", len(written), directory)
    return written
