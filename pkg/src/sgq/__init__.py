"""Exact, windowed verification of shifted symplectic and BV identities on affine cells."""

__version__ = "0.1.0"
