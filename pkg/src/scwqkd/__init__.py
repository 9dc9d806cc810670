"""Finite-key security analysis and protocol simulation for subcarrier-wave QKD."""

from .params import LinkParams, ModulationParams, SecurityParams

__all__ = ["ModulationParams", "LinkParams", "SecurityParams"]
__version__ = "0.1.0"
