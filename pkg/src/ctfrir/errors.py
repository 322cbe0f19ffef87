"""Exception types raised by the toolkit.

Validation problems (bad arguments, malformed objects) derive from both
``CtfRirError`` and ``ValueError`` so callers can catch either.
"""


class CtfRirError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CtfRirError, ValueError):
    """Input fails a precondition or a type invariant."""


# -- signal / spectrogram construction ------------------------------------

class EmptySignal(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class OutLenTooLarge(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


# -- filter fitting --------------------------------------------------------

class DegenerateInput(ValidationError):
    pass


class TooFewFrames(ValidationError):
    pass


class NonFiniteLoss(CtfRirError):
    pass


class RirTooLong(ValidationError):
    pass


# -- sweep measurement -----------------------------------------------------

class InvalidSpec(ValidationError):
    pass


class PeakNotFound(CtfRirError):
    pass


# -- acoustic parameters ---------------------------------------------------

class ZeroEnergy(ValidationError):
    pass


class InsufficientDecayRange(CtfRirError):
    pass


class TooShort(ValidationError):
    pass


# -- room simulation and mixing --------------------------------------------

class InvalidGeometry(ValidationError):
    pass


class InvalidTarget(ValidationError):
    pass


class ZeroNoise(ValidationError):
    pass


class ZeroSpeech(ValidationError):
    pass


# -- evaluation ------------------------------------------------------------

class ZeroRir(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


# -- file I/O ----------------------------------------------------------------

class InvalidAudioFile(ValidationError):
    pass


class InvalidCtfFile(ValidationError):
    pass
