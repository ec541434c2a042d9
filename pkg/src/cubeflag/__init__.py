"""Certified flag-algebra upper bounds for hypercube Turan densities."""

__version__ = "0.1.0"
