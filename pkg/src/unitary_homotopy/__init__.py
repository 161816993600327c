"""Explicit unitary homotopies for pure states on matrix algebras."""

__version__ = "0.1.0"
