"""hdx-verifier - numerical checks for weighted high-dimensional expanders."""

__version__ = "0.1.0"
