"""Numerical checks for Poisson homogeneous spaces, reflection equations and
the integrable systems built on them (open Coxeter-Toda, boundary XXZ)."""

__version__ = "0.1.0"
