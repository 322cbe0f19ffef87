"""Exception hierarchy."""


class NeuralEstimatorError(Exception):
    """Base class for every error this package raises deliberately."""


class ShapeMismatch(NeuralEstimatorError, ValueError):
    """Tensor shape disagrees with the documented contract."""


class NonFinite(NeuralEstimatorError, ValueError):
    """Input contains NaN or Inf."""


class NonFiniteLoss(NeuralEstimatorError, ArithmeticError):
    """The training loss evaluated to NaN or Inf."""


class IoError(NeuralEstimatorError, OSError):
    """An artifact could not be read or written."""


class InvalidManifest(NeuralEstimatorError, ValueError):
    """A dataset manifest is missing fields or points at missing files."""
