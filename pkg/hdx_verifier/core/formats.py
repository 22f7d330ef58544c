"""Text formats for complexes, vertex-set families and point maps."""

from pathlib import Path
from typing import Dict, List, Optional, TextIO, Tuple, Union

import numpy as np

from hdx_verifier.core.complex import SimplicialComplex, build_complex, make_simplex
from hdx_verifier.core.errors import ComplexError, FormatError
from hdx_verifier.core.weights import WeightFunction, weight_from_top

PathLike = Union[str, Path]


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def parse_complex(text: str) -> Tuple[SimplicialComplex, WeightFunction]:
    """Parse ``dim n`` followed by one top simplex per line, optionally ``w <weight>``."""
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError("Empty complex file")
    number, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise FormatError(f"Line {number}: expected header 'dim n', got {header!r}")
    try:
        n = int(parts[1])
    except ValueError as exc:
        raise FormatError(f"Line {number}: dimension is not an integer") from exc
    if n < 0:
        raise FormatError(f"Line {number}: negative dimension")

    tops: List[Tuple[int, ...]] = []
    weights: Dict[Tuple[int, ...], float] = {}
    for number, line in lines[1:]:
        tokens = line.split()
        weight = 1.0
        if "w" in tokens:
            at = tokens.index("w")
            if at != len(tokens) - 2:
                raise FormatError(f"Line {number}: 'w' must be followed by exactly one weight")
            try:
                weight = float(tokens[-1])
            except ValueError as exc:
                raise FormatError(f"Line {number}: weight is not a number") from exc
            tokens = tokens[:at]
        try:
            simplex = make_simplex(int(t) for t in tokens)
        except ValueError as exc:
            raise FormatError(f"Line {number}: vertex ids must be integers") from exc
        except ComplexError as exc:
            raise FormatError(f"Line {number}: {exc}") from exc
        if len(simplex) != n + 1:
            raise FormatError(f"Line {number}: expected {n + 1} vertices, got {len(simplex)}")
        tops.append(simplex)
        weights[simplex] = weight

    try:
        X = build_complex(tops)
    except ComplexError as exc:
        raise FormatError(str(exc)) from exc
    return X, weight_from_top(X, weights)


def read_complex(path: PathLike) -> Tuple[SimplicialComplex, WeightFunction]:
    return parse_complex(_read(path))


def format_complex(X: SimplicialComplex, m: Optional[WeightFunction] = None) -> str:
    lines = [f"dim {X.n}"]
    tops = X.top_simplices
    top_weights = m.level(X.n) if m is not None else np.ones(len(tops))
    for simplex, weight in zip(tops, top_weights):
        line = " ".join(str(v) for v in simplex)
        if weight != 1.0:
            line += f" w {weight:.17g}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def write_complex(X: SimplicialComplex, out: TextIO, m: Optional[WeightFunction] = None) -> None:
    out.write(format_complex(X, m))


def parse_vertex_sets(text: str) -> List[Tuple[int, ...]]:
    """One vertex set per line; a line holding only ``-`` is the empty set."""
    sets = []
    for number, line in _content_lines(text):
        if line == "-":
            sets.append(())
            continue
        try:
            sets.append(tuple(int(t) for t in line.split()))
        except ValueError as exc:
            raise FormatError(f"Line {number}: vertex ids must be integers") from exc
    return sets


def read_vertex_sets(path: PathLike) -> List[Tuple[int, ...]]:
    return parse_vertex_sets(_read(path))


def parse_point_map(text: str, dimension: Optional[int] = None) -> Dict[int, np.ndarray]:
    """Lines ``id x_1 ... x_n``; every point must have the same dimension."""
    points: Dict[int, np.ndarray] = {}
    for number, line in _content_lines(text):
        tokens = line.split()
        try:
            vertex = int(tokens[0])
            coords = np.array([float(t) for t in tokens[1:]])
        except ValueError as exc:
            raise FormatError(f"Line {number}: malformed point line {line!r}") from exc
        if dimension is None:
            dimension = len(coords)
        if len(coords) != dimension:
            raise FormatError(f"Line {number}: expected {dimension} coordinates, got {len(coords)}")
        if vertex in points:
            raise FormatError(f"Line {number}: vertex {vertex} given twice")
        points[vertex] = coords
    return points


def read_point_map(path: PathLike, dimension: Optional[int] = None) -> Dict[int, np.ndarray]:
    return parse_point_map(_read(path), dimension)


def _read(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"Cannot read {path}: {exc}") from exc
