"""Exception hierarchy shared across the package.

The CLI maps :class:`StructuralError` to exit code 2 and
:class:`NumericalDomainError` to exit code 3.
"""


class LieHermError(Exception):
    """Base class for all package errors."""


class StructuralError(LieHermError, ValueError):
    """Malformed input: wrong shapes, bad indices, broken algebraic identities."""


class PreconditionError(StructuralError):
    """An operation was called on data that violates its stated precondition."""


class NumericalDomainError(LieHermError, ArithmeticError):
    """Input is well formed but numerically outside the usable domain."""
