"""Adaptive ANOVA stochastic Galerkin method for diffusion with random coefficients."""

__version__ = "0.1.0"
