"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violated a stated invariant (bad matrix, bad labels, bad table)."""


class InfeasibleError(ValueError):
    """A requested constraint lies outside the achievable range."""
