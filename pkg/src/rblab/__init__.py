"""Numerical checks for relative Rota-Baxter operators on Lie algebras and groups."""

__version__ = "0.1.0"
