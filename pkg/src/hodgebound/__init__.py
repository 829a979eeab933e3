"""Numerical study of lower bounds for exact Hodge eigenvalues on convex
domains with holes: domains, meshes, Whitney-form discretization, kernel
deflated eigensolves, Cech-de Rham primitives and bound evaluators."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
