"""Exception types shared across the package."""


class LosrError(Exception):
    """Base class for all package errors."""


class ArgumentError(LosrError, ValueError):
    """An argument is malformed or inconsistent with the others."""


class ValidationError(ArgumentError):
    """A combinatorial or physical object violates its invariants."""


class CapacityError(LosrError):
    """A dense computation would exceed the configured size cap."""


class PreconditionError(LosrError):
    """A domain precondition (e.g. graph connectivity) does not hold."""


class UnsupportedInputError(LosrError):
    """The input is valid but outside what the operation handles."""


class NumericalError(LosrError, ArithmeticError):
    """An objective or intermediate quantity became non-finite."""


class InvariantViolation(LosrError, AssertionError):
    """An internal invariant failed; indicates a bug, never user error."""
