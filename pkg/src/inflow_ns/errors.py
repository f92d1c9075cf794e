"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalError` so the CLI can
map it to a single exit status.
"""


class DomainError(ValueError):
    """A state or argument lies outside the physical domain (v, theta > 0)."""


class NumericalError(RuntimeError):
    """Base class for failures of an iterative or time-stepping procedure."""


class NoSolution(NumericalError):
    pass


class InvalidRegion(NumericalError):
    pass


class InvalidStrengths(NumericalError):
    pass


class LaunchFailure(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class PositivityViolation(NumericalError):
    pass


class CFLCollapse(NumericalError):
    pass


class InsufficientData(ValueError):
    pass


class ConfigError(ValueError):
    """Raised for malformed or inconsistent run configurations."""


class FarFieldContamination(NumericalError):
    """A wave component reached the far-field Dirichlet node."""
