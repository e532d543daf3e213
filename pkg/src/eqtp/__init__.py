"""Equivariant tensor product operations: CG, Gaunt and matrix products."""

__version__ = "0.1.0"
