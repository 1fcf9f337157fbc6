"""Exception hierarchy shared by all replab modules."""


class ReplabError(Exception):
    """Base class for all library errors."""


class ParameterError(ReplabError, ValueError):
    """An argument is malformed or out of its documented range."""


class DomainError(ReplabError, ValueError):
    """The inputs are well-formed but the requested object does not exist
    (e.g. a proper coloring of a non-colorable graph)."""


class CapacityError(ReplabError, RuntimeError):
    """An exact computation would exceed its enumeration budget.

    ``bound`` records the budget that would be exceeded.
    """

    def __init__(self, message: str, bound: int):
        super().__init__(f"{message} (budget: {bound})")
        self.bound = bound


class RetryExhaustedError(ReplabError, RuntimeError):
    """A rejection-sampling loop hit its iteration cap."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts
