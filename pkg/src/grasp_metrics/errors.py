"""Exception hierarchy.

Three families, matching the CLI exit-code contract:

* ``UsageError``      -> exit 1 (bad flags, unknown names, mismatched inputs)
* ``ValidationError`` -> exit 2 (malformed or empty data)
* ``NumericalError``  -> exit 3 (eigensolver failures, non-PSD inputs,
  scores negative beyond noise tolerance)
"""


class GraspMetricsError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(GraspMetricsError):
    """Configuration or usage problem; maps to CLI exit code 1."""


class InvalidParameter(UsageError):
    """A parameter is outside its documented domain."""


class UnknownDescriptor(UsageError):
    """Descriptor name not present in the registry."""


class UnsupportedDescriptor(UsageError):
    """Descriptor exists but does not support the requested operation."""


class DescriptorMismatch(UsageError):
    """Two inputs were produced with different descriptors or dimensions."""


class ValidationError(GraspMetricsError):
    """Malformed input data; maps to CLI exit code 2."""


class WrongPointCount(ValidationError):
    """Pose does not consist of exactly 21 coordinate pairs."""


class NonFiniteCoordinate(ValidationError):
    """Pose contains a NaN or infinite coordinate."""


class ParseError(ValidationError):
    """A pose file line could not be parsed; message cites the line number."""


class EmptyPopulation(ValidationError):
    """A statistics operation received a population with no poses."""


class NumericalError(GraspMetricsError):
    """Numerical failure; maps to CLI exit code 3."""


class EigenFailure(NumericalError):
    """Eigendecomposition did not converge."""


class NotPsd(NumericalError):
    """Matrix has an eigenvalue below the near-PSD tolerance."""


class DimensionMismatch(NumericalError):
    """Matrices passed to a binary operation have different dimensions."""


class NumericalFailure(NumericalError):
    """A score came out negative beyond what rounding noise can explain."""
