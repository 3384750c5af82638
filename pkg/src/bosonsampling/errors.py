"""Exception types shared across the package.

The CLI maps each family onto a process exit code.
"""


class BosonSamplingError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class SchemaError(BosonSamplingError, ValueError):
    """Malformed input data or a failed validation check."""

    exit_code = 2


class DimensionError(BosonSamplingError, ValueError):
    """Mode-count or photon-number mismatch between objects."""

    exit_code = 3


class NumericalDomainError(BosonSamplingError, ArithmeticError):
    """Inputs outside the numerically supported domain (zero denominators, sizes too large)."""

    exit_code = 4
