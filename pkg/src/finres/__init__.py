"""Finite-resolution dynamics: open box covers, combinatorial maps, and
linear-time transitivity / mixing checks."""

__version__ = "0.1.0"
