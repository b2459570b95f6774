"""Exception types shared across the package."""


class LatentOdeError(Exception):
    """Base class for errors raised by latentode."""


class InvalidArgument(LatentOdeError, ValueError):
    """An input violated a documented precondition."""


class IntegrationDiverged(LatentOdeError, ArithmeticError):
    """A trajectory produced a non-finite state.

    ``last_valid`` is the index of the last finite sample.
    """

    def __init__(self, last_valid, message=None):
        self.last_valid = int(last_valid)
        super().__init__(message or f"integration diverged after sample {self.last_valid}")
