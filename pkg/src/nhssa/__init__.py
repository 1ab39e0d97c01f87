"""Non-Hermitian Singular Spectrum Analysis toolkit for exponential retrieval."""

__version__ = "0.1.0"
