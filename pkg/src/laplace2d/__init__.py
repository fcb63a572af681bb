"""Laplace transformations of 2D Schrodinger operators, continuum and discrete."""

__version__ = "0.1.0"
