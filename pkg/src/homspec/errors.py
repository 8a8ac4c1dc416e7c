"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class DomainError(ValueError):
    """Requested evaluation lies outside the data a quantity is defined on."""


class CalibrationError(RuntimeError):
    """A calibration root-solve could not bracket a solution."""


class UndefinedStatistic(ArithmeticError):
    """A statistic is undefined for the supplied data (e.g. zero variance)."""
