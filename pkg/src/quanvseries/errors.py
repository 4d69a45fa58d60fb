"""Exception types shared across the package."""


class QuanvError(Exception):
    """Base class for all package-specific errors."""


class SizeError(QuanvError, ValueError):
    """A dimension, length, or qubit count is out of range or inconsistent."""


class ArityError(QuanvError, ValueError):
    """Supplied parameter/data/weight lengths do not match the declared slots."""


class UnsupportedGateError(QuanvError, ValueError):
    """Operation requested on a gate kind that does not support it."""


class DescriptorError(QuanvError, ValueError):
    """A model descriptor is internally inconsistent."""


class AliasingError(QuanvError, ValueError):
    """Requested DFT grid is too small for the circuit's frequency band."""


class ParseError(QuanvError, ValueError):
    """A file could not be parsed; message carries the location."""


class ScalerError(QuanvError, ValueError):
    """Scaler fitted on a degenerate value range."""


class IntegrationError(QuanvError, ArithmeticError):
    """Numerical integration produced a non-finite state."""


class TrainingError(QuanvError, RuntimeError):
    """Training diverged; ``epoch`` records where."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch


class CheckpointError(QuanvError, ValueError):
    """A checkpoint file is malformed."""


class DescriptorMismatchError(CheckpointError):
    """Checkpoint was written for a different model descriptor."""
