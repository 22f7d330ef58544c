"""Exception hierarchy for hdx-verifier."""

from typing import Optional, Tuple


class HDXError(Exception):
    """Base class for every error raised by the library."""


class ComplexError(HDXError):
    """Invalid simplices, inconsistent sizes, duplicates or unknown simplex."""


class WeightError(HDXError):
    """Non-positive or unbalanced weight function."""


class LevelError(HDXError):
    """Cochain level mismatch or level outside the admissible range."""


class DisjointnessError(HDXError):
    """Vertex sets that were required to be pairwise disjoint overlap."""


class PartiteError(HDXError):
    """Complex is not partite, side propagation is ambiguous, or U_i is not inside S_i."""


class ConnectivityError(HDXError):
    """A 1-skeleton (of the complex or of a link) is disconnected."""

    def __init__(self, message: str, simplex: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.simplex = simplex


class SpectralError(HDXError):
    """Operator is not self-adjoint or the eigensolver failed."""


class VacuousBoundError(HDXError):
    """A descent bound has a non-positive denominator."""


class GenerationError(HDXError):
    """Generator parameters are invalid or retries were exhausted."""


class FormatError(HDXError):
    """Malformed complex, vertex-set or point-map file."""


class ParameterError(HDXError):
    """Numeric parameter outside its admissible range."""


# Errors caused by user input rather than by a failed verification.
INPUT_ERRORS = (
    FormatError,
    ParameterError,
    ComplexError,
    DisjointnessError,
    PartiteError,
    ConnectivityError,
    GenerationError,
    LevelError,
    WeightError,
    VacuousBoundError,
)
