"""Exact curvature and Ricci-like soliton computations on almost contact B-metric manifolds."""

__version__ = "0.1.0"
