"""Discrete vector bundles with connection over simplicial complexes."""

__version__ = "0.1.0"
