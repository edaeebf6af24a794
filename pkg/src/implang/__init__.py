"""Impossible-language corpus perturbation and learnability evaluation."""

__version__ = "0.1.0"
