"""Exact curves and discrete extremal length on the punctured pillowcase."""

__version__ = "0.1.0"

__all__ = ["__version__"]
