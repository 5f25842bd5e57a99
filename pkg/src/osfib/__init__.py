"""Simulation and verification toolkit for the stochastic one-sided full-information bandit."""

__version__ = "0.1.0"
