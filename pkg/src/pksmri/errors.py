"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input failed a shape, range or finiteness check."""


class MaskGenerationError(RuntimeError):
    """A sampling pattern could not be calibrated to the requested density."""


class NumericalDivergenceError(RuntimeError):
    """An iterative solver produced non-finite values."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite k-space estimate at iteration {iteration}")


class RawFormatError(ValueError):
    """Base class for raw k-space file problems. ``code`` is a stable exit status."""

    code = 3


class RawHeaderError(RawFormatError):
    code = 3


class RawTruncatedError(RawFormatError):
    code = 4


class RawSizeMismatchError(RawFormatError):
    code = 5
