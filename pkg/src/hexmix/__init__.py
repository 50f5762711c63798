"""Lozenge-tiling Glauber dynamics, exact sampling, and limit-shape analytics."""

from .hexlattice import HexDomain, HeightField, make_domain

__all__ = ["HexDomain", "HeightField", "make_domain"]
__version__ = "0.1.0"
