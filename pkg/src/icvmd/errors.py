"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """An argument violates a documented precondition (bad shape, range, or combination)."""


class DegenerateInputError(ValueError):
    """Structurally valid input with no usable content (all-zero signal, empty class, ...)."""
