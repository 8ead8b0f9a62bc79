"""Deterministic 2D person-following simulator and library."""

__version__ = "0.1.0"
