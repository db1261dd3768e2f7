"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where a quantity is defined."""


class DivergenceError(DomainError):
    """The requested success probability would make the drive field diverge."""


class ConsistencyError(RuntimeError):
    """An internal consistency check failed (e.g. a negative population)."""


class StiffnessError(RuntimeError):
    """The adaptive integrator could not take a step.

    Attributes
    ----------
    t_fail : float
        Time at which the integrator stopped.
    """

    def __init__(self, message: str, t_fail: float):
        super().__init__(f"{message} (failed at t = {t_fail:.6g})")
        self.t_fail = t_fail


class ConfigError(DomainError):
    """A configuration file could not be parsed or validated."""
