"""Four-wave asymptotic profiles for the inflow problem of 1-D compressible Navier-Stokes."""

from .gas import GasParams, ThermoState

__all__ = ["GasParams", "ThermoState"]
__version__ = "0.1.0"
