"""Exception types raised across the package."""


class LamosError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LamosError, ValueError):
    pass


class UnderflowError(LamosError, ArithmeticError):
    """Subtraction would produce a negative value."""


class InvalidModulusError(LamosError, ValueError):
    pass


class OutOfRangeError(LamosError, ValueError):
    """An operand is not reduced modulo the context modulus."""


class ContractViolation(LamosError, AssertionError):
    """An internal invariant failed; indicates a bug upstream of the check."""
