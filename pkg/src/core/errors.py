class ConfigurationError(ValueError):
    """Raised when a parameter or an experiment spec field is invalid."""
    pass


class DomainError(ValueError):
    """Raised when a quantity is requested outside its mathematical domain."""
    pass


class QuadratureError(RuntimeError):
    """
    Raised when an integral does not converge within its evaluation budget.

    Attributes:
    value (float): Partial value reached before giving up.
    abs_error_estimate (float): Error estimate of the partial value.
    evaluations (int): Integrand evaluations spent.
    """

    def __init__(self, message: str, value: float, abs_error_estimate: float, evaluations: int):
        super().__init__(message)
        self.value = value
        self.abs_error_estimate = abs_error_estimate
        self.evaluations = evaluations


class InversionError(RuntimeError):
    """Raised when a success-probability curve cannot be inverted at the target."""
    pass
