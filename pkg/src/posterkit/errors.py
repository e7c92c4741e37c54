"""Errors shared across modules."""


class InputError(ValueError):
    """The caller's request violates a precondition (bad or missing input)."""
