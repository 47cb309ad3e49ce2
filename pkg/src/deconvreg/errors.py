"""Exception hierarchy shared by all modules."""


class DeconvError(Exception):
    """Base class for errors raised by deconvreg."""


class InputValidationError(DeconvError, ValueError):
    """Malformed user input (shapes, grids, parameter domains)."""


class ShapeMismatchError(InputValidationError):
    pass


class FrequencyOverflowError(InputValidationError):
    """Requested frequencies exceed what the design grid resolves."""


class NumericalError(DeconvError, ArithmeticError):
    """A numerical procedure failed or produced unusable output."""


class IntegrationError(NumericalError):
    pass


class NonInvertibleDistortionError(NumericalError):
    pass


class SymmetryViolationError(NumericalError):
    """Coefficients are not Hermitian, so the series is not real-valued."""


class DegenerateDistributionError(NumericalError):
    pass
