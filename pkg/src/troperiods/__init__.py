"""Asymptotic expansions of toric hypersurface periods over tropical cycles."""

__version__ = "0.1.0"
