"""Numerical filling of families of closed curves in C^2 by holomorphic chains."""

__version__ = "0.1.0"
