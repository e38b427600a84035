"""Exception types shared across the solver modules."""


class ContractViolation(ValueError):
    """An operation was handed state that violates its preconditions."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""


class NestingError(RuntimeError):
    """A fine patch is not properly contained in the next coarser level."""


class SynchronizationError(RuntimeError):
    """Levels that must share a time stamp do not."""


class SingularSystemError(RuntimeError):
    """The tridiagonal elliptic system lost its pivot structure."""

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"singular tridiagonal system at cell index {row}")


class CflViolation(RuntimeError):
    """A hyperbolic step exceeded the stable Courant number.

    Carries the wave-speed bound observed during the rejected step so the
    driver can pick a smaller dt and retry.
    """

    def __init__(self, max_speed: float, courant: float):
        self.max_speed = max_speed
        self.courant = courant
        super().__init__(f"step rejected: Courant number {courant:.3f} > 1 (max speed {max_speed:.6g})")


class NumericalError(RuntimeError):
    """The solution left the regime the scheme can represent."""
