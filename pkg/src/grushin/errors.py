"""Exception types raised by the toolkit."""


class GrushinError(ValueError):
    """Base class for domain errors (bad inputs, excluded regions)."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget; ``bracket`` holds the last interval(s)."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class SingularLineError(GrushinError):
    """A finite-difference stencil would touch the singular line u = 0."""


class BranchDomainError(GrushinError):
    """A point lies outside the principal-branch domain of a flow map."""


class BlowUpError(GrushinError):
    """The closed-form flow denominator vanishes (finite-time blow-up)."""


class DivergenceError(GrushinError):
    """A numerical trajectory left the safe domain; ``step`` is the exit step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
