"""Energy-efficient power control game for impulse-radio UWB uplinks with Rake receivers."""
from .errors import (ConfigurationError, DegenerateProfileError, DomainError, InfeasibleError,
                     RealizationError, SolverError, UnsupportedConfigurationError, UwbGameError)
from .params import GameParams

__version__ = "0.1.0"

__all__ = ["GameParams", "UwbGameError", "ConfigurationError", "DomainError", "RealizationError",
           "InfeasibleError", "DegenerateProfileError", "UnsupportedConfigurationError", "SolverError",
           "__version__"]
