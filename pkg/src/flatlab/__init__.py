"""Exact computations with flat affine connections and left-symmetric algebras."""

__version__ = "0.1.0"
