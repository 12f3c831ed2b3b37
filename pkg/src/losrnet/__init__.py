"""Simulation and bounds for GHZ-state preparation in triangle networks."""

__version__ = "0.1.0"
