"""Exceptions raised by pykoszul."""


class FieldMismatchError(ValueError):
    """Operands live over different fields."""


class ComplexError(ValueError):
    """A complex is malformed, e.g. d∘d ≠ 0."""


class ChainMapError(ValueError):
    """A family of matrices does not commute with the differentials."""


class PreconditionError(ValueError):
    """An operation was called on input outside its domain."""


class CocycleError(PreconditionError):
    """A cochain expected to be closed is not."""


class UnsupportedAutomorphismError(NotImplementedError):
    """The requested field automorphism does not exist on this field."""


class UsageError(ValueError):
    """Malformed command line, suite configuration or field string."""
