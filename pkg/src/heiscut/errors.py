"""Shared exception types.

The CLI maps these to exit codes: :class:`PreconditionError` and
:class:`SchemaError` exit with 2, :class:`NumericError` with 3.
"""


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


class SchemaError(PreconditionError):
    """An input file or JSON payload does not match its schema."""


class UnsupportedPairError(PreconditionError):
    """A cut-metric evaluator was asked about a pair it cannot handle."""


class WindowError(PreconditionError):
    """A point lies outside the configured window, or the window is empty."""


class NumericError(RuntimeError):
    """A solver or root-finder failed to converge."""
