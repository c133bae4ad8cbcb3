"""Exception and warning types raised across the package."""


class UwbGameError(Exception):
    """Base class for all package errors."""


class ConfigurationError(UwbGameError, ValueError):
    """Invalid model, receiver, game or scenario parameters."""


class DomainError(UwbGameError, ValueError):
    """An argument lies outside the domain of a function."""


class RealizationError(UwbGameError, RuntimeError):
    """A channel realization cannot be used (e.g. non-positive signal gain)."""


class InfeasibleError(UwbGameError, RuntimeError):
    """A requested operating point cannot be reached for this system."""


class DegenerateProfileError(UwbGameError, ValueError):
    """A variance profile yields a zero normalization term."""


class UnsupportedConfigurationError(UwbGameError, NotImplementedError):
    """The requested receiver/model combination is not covered by the analysis."""


class SolverError(UwbGameError, ArithmeticError):
    """A root solver could not bracket or converge."""


class SmallFrameCountWarning(UserWarning):
    """The SINR approximation is only reliable for roughly five or more frames."""
