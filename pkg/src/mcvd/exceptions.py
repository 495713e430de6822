class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class DivergenceError(DomainError):
    """The requested steady-state quantity is infinite for these parameters."""


class NumericError(ArithmeticError):
    """A numerical routine failed to converge.

    ``partial`` carries the best estimate available when the routine gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial

