"""Configuration, fitting, verification suites and the command-line interface."""

from .config import RunConfig, load_config
from .fitting import DecaySeries, fit_decay

__all__ = ["RunConfig", "load_config", "DecaySeries", "fit_decay"]
