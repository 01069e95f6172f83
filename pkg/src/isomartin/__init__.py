"""Massive Laplacian, Green function and Martin kernel on isoradial graphs."""

__version__ = "0.1.0"
