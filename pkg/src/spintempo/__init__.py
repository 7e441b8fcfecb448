"""Quantum proper time of spin-1/2 particles in weak static gravitational fields."""

__version__ = "0.1.0"
