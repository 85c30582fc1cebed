"""Numerical toolkit for multilinear multiplier bounds on L^2 x ... x L^2 -> L^{2/m}."""

__version__ = "0.1.0"
