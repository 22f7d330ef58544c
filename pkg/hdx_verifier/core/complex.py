"""Pure simplicial complexes: face enumeration, links, vertex-set spans and sides."""

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from hdx_verifier.core.errors import (
    ComplexError,
    ConnectivityError,
    DisjointnessError,
    LevelError,
    PartiteError,
)

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]
EMPTY: Simplex = ()


def make_simplex(vertices: Iterable[int]) -> Simplex:
    """Return the canonical (sorted) form of a vertex set, validating ids."""
    vs = tuple(int(v) for v in vertices)
    if any(v < 0 for v in vs):
        raise ComplexError(f"Negative vertex id in {vs}")
    canonical = tuple(sorted(vs))
    if len(set(canonical)) != len(canonical):
        raise ComplexError(f"Duplicate vertex in simplex {vs}")
    return canonical


class SimplicialComplex:
    """A pure n-dimensional simplicial complex with every face indexed.

    ``simplices(k)`` lists X(k) in a fixed order for -1 <= k <= n, so a
    k-cochain is a plain vector indexed like ``simplices(k)``. X(-1) holds the
    empty simplex only.
    """

    def __init__(self, n: int, faces: Sequence[Sequence[Simplex]]):
        if len(faces) != n + 2:
            raise ComplexError(f"Expected {n + 2} face levels, got {len(faces)}")
        self._n = n
        self._faces: Tuple[Tuple[Simplex, ...], ...] = tuple(tuple(level) for level in faces)
        self._index: Tuple[Dict[Simplex, int], ...] = tuple(
            {s: i for i, s in enumerate(level)} for level in self._faces
        )
        if self._faces[0] != (EMPTY,):
            raise ComplexError("X(-1) must consist of the empty simplex only")
        self._boundary = self._build_boundary()
        self._cofaces = self._build_cofaces()

    def _build_boundary(self) -> Tuple[Tuple[np.ndarray, ...], ...]:
        levels = [tuple(np.empty(0, dtype=np.intp) for _ in self._faces[0])]
        for k in range(0, self._n + 1):
            lower = self._index[k]
            rows = []
            for s in self._faces[k + 1]:
                try:
                    rows.append(np.array([lower[f] for f in combinations(s, k)], dtype=np.intp))
                except KeyError as exc:
                    raise ComplexError(f"Complex is not downward closed at {s}") from exc
            levels.append(tuple(rows))
        return tuple(levels)

    def _build_cofaces(self) -> Tuple[Tuple[np.ndarray, ...], ...]:
        levels = []
        for k in range(-1, self._n + 1):
            buckets: List[List[int]] = [[] for _ in self._faces[k + 1]]
            if k < self._n:
                for j, faces in enumerate(self._boundary[k + 2]):
                    for i in faces:
                        buckets[i].append(j)
            levels.append(tuple(np.array(b, dtype=np.intp) for b in buckets))
        return tuple(levels)

    @property
    def n(self) -> int:
        return self._n

    def simplices(self, k: int) -> Tuple[Simplex, ...]:
        """All k-simplices in index order."""
        self._check_level(k)
        return self._faces[k + 1]

    def size(self, k: int) -> int:
        return len(self.simplices(k))

    @property
    def top_simplices(self) -> Tuple[Simplex, ...]:
        return self._faces[self._n + 1]

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(s[0] for s in self._faces[1])

    def contains(self, simplex: Iterable[int]) -> bool:
        s = tuple(sorted(simplex))
        k = len(s) - 1
        return -1 <= k <= self._n and s in self._index[k + 1]

    def index_of(self, simplex: Iterable[int]) -> int:
        """Row of ``simplex`` in the index of its dimension."""
        s = tuple(sorted(simplex))
        k = len(s) - 1
        if not -1 <= k <= self._n or s not in self._index[k + 1]:
            raise ComplexError(f"Simplex {s} is not in the complex")
        return self._index[k + 1][s]

    def boundary(self, k: int, i: int) -> np.ndarray:
        """Indices in X(k-1) of the (k-1)-faces of the i-th k-simplex."""
        self._check_level(k)
        return self._boundary[k + 1][i]

    def cofaces(self, k: int, i: int) -> np.ndarray:
        """Indices in X(k+1) of the (k+1)-cofaces of the i-th k-simplex."""
        self._check_level(k)
        return self._cofaces[k + 1][i]

    def top_cofaces(self, simplex: Iterable[int]) -> Tuple[Simplex, ...]:
        """All n-simplices containing ``simplex``."""
        s = set(simplex)
        return tuple(t for t in self.top_simplices if s.issubset(t))

    @cached_property
    def skeleton(self) -> nx.Graph:
        """The 1-skeleton as a networkx graph on vertex ids."""
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        if self._n >= 1:
            graph.add_edges_from(self._faces[2])
        return graph

    def is_connected(self) -> bool:
        return self.skeleton.number_of_nodes() > 0 and nx.is_connected(self.skeleton)

    def f_vector(self) -> Tuple[int, ...]:
        """Face counts for k = -1..n."""
        return tuple(len(level) for level in self._faces)

    def _check_level(self, k: int) -> None:
        if not -1 <= k <= self._n:
            raise LevelError(f"Level {k} outside -1..{self._n}")

    def __repr__(self) -> str:
        return f"SimplicialComplex(n={self._n}, f_vector={self.f_vector()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self._n == other._n and self._faces == other._faces

    def __hash__(self) -> int:
        return hash((self._n, self.top_simplices))


def build_complex(top_simplices: Iterable[Iterable[int]]) -> SimplicialComplex:
    """Build the downward closure of a family of equal-size vertex sets."""
    tops = [make_simplex(t) for t in top_simplices]
    if not tops:
        raise ComplexError("At least one top simplex is required")
    sizes = {len(t) for t in tops}
    if len(sizes) != 1:
        raise ComplexError(f"Inconsistent top simplex sizes: {sorted(sizes)}")
    if len(set(tops)) != len(tops):
        raise ComplexError("Duplicate top simplices")
    n = sizes.pop() - 1
    if n < 0:
        raise ComplexError("Top simplices must be nonempty")

    levels: List[set] = [set() for _ in range(n + 2)]
    for t in tops:
        for r in range(n + 2):
            levels[r].update(combinations(t, r))
    faces = [sorted(level) for level in levels]
    logger.debug("Built complex n=%d with f-vector %s", n, [len(f) for f in faces])
    return SimplicialComplex(n, faces)


def link_complex(X: SimplicialComplex, tau: Iterable[int]) -> SimplicialComplex:
    """The link X_tau as a complex on the original vertex ids."""
    t = tuple(sorted(tau))
    X.index_of(t)
    k = len(t) - 1
    if k > X.n - 1:
        raise LevelError(f"Link of a {k}-simplex in an {X.n}-complex is empty")
    if not t:
        return X
    ts = set(t)
    return build_complex(tuple(v for v in s if v not in ts) for s in X.top_cofaces(t))


def check_disjoint(vertex_sets: Sequence[Iterable[int]]) -> Tuple[frozenset, ...]:
    """Freeze vertex sets, raising if any two of them share a vertex."""
    frozen = tuple(frozenset(int(v) for v in u) for u in vertex_sets)
    seen: Dict[int, int] = {}
    for i, u in enumerate(frozen):
        for v in u:
            if v in seen:
                raise DisjointnessError(f"Vertex {v} lies in both U_{seen[v]} and U_{i}")
            seen[v] = i
    return frozen


def spanning_mask(X: SimplicialComplex, vertex_sets: Sequence[Iterable[int]]) -> np.ndarray:
    """Boolean mask over X(k) of the simplices with one vertex in each U_i."""
    sets = check_disjoint(vertex_sets)
    k = len(sets) - 1
    if not 0 <= k <= X.n:
        raise LevelError(f"{len(sets)} vertex sets do not span a level of an {X.n}-complex")
    owner = {v: i for i, u in enumerate(sets) for v in u}
    mask = np.zeros(X.size(k), dtype=bool)
    for j, s in enumerate(X.simplices(k)):
        hit = {owner.get(v) for v in s}
        mask[j] = None not in hit and len(hit) == k + 1
    return mask


def simplices_spanning(
    X: SimplicialComplex, vertex_sets: Sequence[Iterable[int]]
) -> Tuple[Simplex, ...]:
    """X(U_0,...,U_k): the k-simplices with exactly one vertex in each U_i."""
    mask = spanning_mask(X, vertex_sets)
    level = X.simplices(len(vertex_sets) - 1)
    return tuple(level[j] for j in np.flatnonzero(mask))


@dataclass(frozen=True)
class PartiteStructure:
    """Sides S_0,...,S_n of an (n+1)-partite complex."""

    sides: Tuple[Tuple[int, ...], ...]
    side_of: Mapping[int, int]

    @property
    def n(self) -> int:
        return len(self.sides) - 1

    def side_mask(self, X: SimplicialComplex, i: int) -> np.ndarray:
        """Indicator of S_i as a boolean vector over X(0)."""
        return np.array([self.side_of[v] == i for v in X.vertices], dtype=bool)

    def restrict(self, vertices: Iterable[int]) -> "PartiteStructure":
        """Sides intersected with a vertex subset, dropping empty sides."""
        keep = set(vertices)
        sides = tuple(tuple(v for v in side if v in keep) for side in self.sides)
        sides = tuple(side for side in sides if side)
        return PartiteStructure(sides, {v: i for i, side in enumerate(sides) for v in side})


def detect_partite(X: SimplicialComplex) -> Optional[PartiteStructure]:
    """Find sides S_0..S_n making every n-simplex rainbow, or None.

    Colours propagate along n-simplices sharing an (n-1)-face, which fixes the
    colouring up to relabeling; a disconnected n-simplex adjacency leaves the
    relative labeling of its components undetermined and raises.
    """
    if not X.is_connected():
        raise ConnectivityError("1-skeleton is disconnected", simplex=EMPTY)
    n = X.n
    tops = X.top_simplices
    colour: Dict[int, int] = {v: c for c, v in enumerate(tops[0])}
    visited = {0}
    queue = deque([0])
    while queue:
        j = queue.popleft()
        for f in X.boundary(n, j):
            for j2 in X.cofaces(n - 1, int(f)):
                j2 = int(j2)
                if j2 in visited:
                    continue
                face = X.simplices(n - 1)[int(f)]
                (new_vertex,) = set(tops[j2]) - set(face)
                missing = set(range(n + 1)) - {colour[v] for v in face}
                if len(missing) != 1:
                    return None
                c = missing.pop()
                if colour.setdefault(new_vertex, c) != c:
                    return None
                visited.add(j2)
                queue.append(j2)
    if len(visited) != len(tops):
        raise PartiteError("n-simplex adjacency is disconnected; sides are ambiguous")
    for t in tops:
        if len({colour[v] for v in t}) != n + 1:
            return None

    groups: Dict[int, List[int]] = {}
    for v in X.vertices:
        groups.setdefault(colour[v], []).append(v)
    sides = tuple(sorted((tuple(sorted(g)) for g in groups.values()), key=lambda s: s[0]))
    logger.debug("Detected %d sides", len(sides))
    return PartiteStructure(sides, {v: i for i, side in enumerate(sides) for v in side})


def partite_from_sides(X: SimplicialComplex, sides: Sequence[Iterable[int]]) -> PartiteStructure:
    """Validate a user-supplied side partition."""
    frozen = check_disjoint(sides)
    if len(frozen) != X.n + 1:
        raise PartiteError(f"Expected {X.n + 1} sides, got {len(frozen)}")
    side_of = {v: i for i, side in enumerate(frozen) for v in side}
    if set(side_of) != set(X.vertices):
        raise PartiteError("Sides do not partition the vertex set")
    for t in X.top_simplices:
        if len({side_of[v] for v in t}) != X.n + 1:
            raise PartiteError(f"Top simplex {t} is not rainbow")
    return PartiteStructure(tuple(tuple(sorted(s)) for s in frozen), side_of)
