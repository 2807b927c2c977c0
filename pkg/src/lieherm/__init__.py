"""Chern-connection geometry of left-invariant Hermitian structures on Lie algebras."""

__version__ = "0.1.0"
