"""Exception hierarchy.

Every error carries the process exit code the command-line front end maps it
to: 3 domain/range, 4 data format, 5 numerical (2 is left to argparse for
usage errors).
"""


class TreePLError(Exception):
    exit_code = 1


class InvalidArgumentError(TreePLError, ValueError):
    exit_code = 3


class DomainError(TreePLError, ValueError):
    """Input lies outside the range on which a formula or model is defined."""

    exit_code = 3


class BandwidthError(DomainError):
    """Bandwidth not tabulated, outside the tabulated span, or above the sample rate."""


class DataFormatError(TreePLError, ValueError):
    exit_code = 4


class ParseError(DataFormatError):
    pass


class ShapeError(DataFormatError):
    pass


class VersionError(DataFormatError):
    pass


class EmptyInputError(DataFormatError):
    pass


class GeometryError(DataFormatError):
    pass


class MissingReferenceError(DataFormatError):
    """Dataset lacks the reference-angle batch."""


class ConfigError(DataFormatError):
    pass


class UnderdeterminedError(DataFormatError):
    pass


class ImpulseIndexError(TreePLError, IndexError):
    exit_code = 3


class NumericalError(TreePLError, ArithmeticError):
    exit_code = 5


class DegenerateError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class DivisionError(NumericalError, ZeroDivisionError):
    pass


class FitError(TreePLError):
    """Wraps a per-bandwidth fit failure so the offending bandwidth is named."""

    def __init__(self, bandwidth_hz, cause):
        self.bandwidth_hz = bandwidth_hz
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"fit failed for bandwidth {bandwidth_hz / 1e6:g} MHz: {cause}")


class ExtrapolationWarning(UserWarning):
    """Model evaluated outside its stated angular validity range."""
