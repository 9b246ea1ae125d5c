"""Limit points of Morsification trajectories and polar multiplicities."""

__version__ = "0.1.0"
