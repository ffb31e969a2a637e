"""Numerical verification of Sasakian hypersurface identities."""

__version__ = "0.1.0"
