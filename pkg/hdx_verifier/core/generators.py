"""Desk-scale complexes with known structure."""

import logging
from itertools import combinations, product
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from hdx_verifier.core.cochains import spawn_generators
from hdx_verifier.core.complex import SimplicialComplex, build_complex, link_complex
from hdx_verifier.core.errors import GenerationError

logger = logging.getLogger(__name__)

Family = Literal["complete", "complete-partite", "single-simplex", "random-pure"]


class GeneratorSpec(BaseModel):
    """Family name plus the parameters that family needs."""

    family: Family
    N: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=0)
    sides: Optional[List[int]] = None
    p: float = Field(default=1.0, gt=0.0, le=1.0)
    seed: int = 0
    max_retries: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _check_family(self) -> "GeneratorSpec":
        if self.family in ("complete", "random-pure"):
            if self.N is None or self.n is None:
                raise ValueError(f"{self.family} needs N and n")
            if self.N < self.n + 1:
                raise ValueError(f"N={self.N} is smaller than n+1={self.n + 1}")
        elif self.family == "complete-partite":
            if not self.sides or any(s < 1 for s in self.sides):
                raise ValueError("complete-partite needs side sizes, each at least 1")
        elif self.n is None:
            raise ValueError("single-simplex needs n")
        return self


def complete_complex(N: int, n: int) -> SimplicialComplex:
    """Every (n+1)-subset of {0..N-1}."""
    if n < 0 or N < n + 1:
        raise GenerationError(f"complete complex needs N >= n+1, got N={N}, n={n}")
    return build_complex(combinations(range(N), n + 1))


def single_simplex(n: int) -> SimplicialComplex:
    return complete_complex(n + 1, n)


def tetrahedron_boundary() -> SimplicialComplex:
    return complete_complex(4, 2)


def complete_partite(side_sizes: List[int]) -> SimplicialComplex:
    """All transversals of consecutive id blocks of the given sizes."""
    if not side_sizes or any(size < 1 for size in side_sizes):
        raise GenerationError(f"Side sizes must all be at least 1, got {side_sizes}")
    blocks, start = [], 0
    for size in side_sizes:
        blocks.append(range(start, start + size))
        start += size
    return build_complex(product(*blocks))


def links_connected(X: SimplicialComplex) -> bool:
    """Every link of dimension at least 1, the complex itself included, is connected."""
    for k in range(-1, X.n - 1):
        for tau in X.simplices(k):
            if not link_complex(X, tau).is_connected():
                return False
    return True


def random_pure_complex(N: int, n: int, p: float, seed: int = 0,
                        max_retries: int = 100) -> SimplicialComplex:
    """Keep each (n+1)-subset with probability p.

    Draws repeat until the complex uses all N vertices and every link of
    dimension at least 1 is connected.
    """
    if not 0 < p <= 1:
        raise GenerationError(f"p={p} must lie in (0, 1]")
    if n < 0 or N < n + 1:
        raise GenerationError(f"random complex needs N >= n+1, got N={N}, n={n}")
    candidates = list(combinations(range(N), n + 1))
    rng = spawn_generators(seed, 1)[0]
    for attempt in range(1, max_retries + 1):
        keep = rng.random(len(candidates)) < p
        tops = [s for s, kept in zip(candidates, keep) if kept]
        if not tops:
            continue
        X = build_complex(tops)
        if len(X.vertices) == N and links_connected(X):
            logger.info("Random complex accepted after %d attempt(s): f=%s", attempt,
                        X.f_vector())
            return X
    raise GenerationError(f"No complex with connected links after {max_retries} attempts")


def generate(spec: GeneratorSpec) -> SimplicialComplex:
    if spec.family == "complete":
        return complete_complex(spec.N, spec.n)
    if spec.family == "complete-partite":
        return complete_partite(spec.sides)
    if spec.family == "single-simplex":
        return single_simplex(spec.n)
    return random_pure_complex(spec.N, spec.n, spec.p, spec.seed, spec.max_retries)
