"""Sphere Multipliers - multiplier operators, kernels and eigenvalue decay on S^m."""

from .version import __version__

__all__ = ["__version__"]
