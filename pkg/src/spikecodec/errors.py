from typing import List

__all__: List[str] = [
    "SpikeCodecError",
    "ConfigError",
    "EmptySceneError",
    "EmptyScheduleError",
    "BadMagicError",
    "TruncatedFileError",
    "LengthMismatchError",
    "PgmFormatError",
    "UnsupportedMaxvalError",
    "AmbiguousOrderingError",
    "CorruptStreamError",
    "SymbolCountError",
    "ContainerMismatchError",
    "EmptyIntersectionError",
    "RdCurveError",
]

################################################################################
# Base class
################################################################################


class SpikeCodecError(Exception):
    """
    Base class for every error raised by spikecodec.

    The exit code is what the command-line interface returns when the
    error escapes a subcommand.
    """

    exit_code: int = 1


################################################################################
# Argument and configuration errors
################################################################################


class ConfigError(SpikeCodecError, ValueError):
    exit_code = 3


class EmptySceneError(SpikeCodecError, ValueError):
    exit_code = 3


class EmptyScheduleError(SpikeCodecError):
    exit_code = 4

    def __init__(self, n_frames: int, half_window: int, step: int) -> None:
        super().__init__(
            f"schedule empty: {n_frames} frames cannot hold a keyframe window "
            f"of radius {half_window} at step {step}"
        )
        self.n_frames = n_frames
        self.half_window = half_window
        self.step = step


################################################################################
# File format errors
################################################################################


class BadMagicError(SpikeCodecError):
    exit_code = 5

    def __init__(self, expected: bytes, actual: bytes) -> None:
        super().__init__(f"bad magic: expected {expected!r}, found {actual!r}")
        self.expected = expected
        self.actual = actual


class TruncatedFileError(SpikeCodecError):
    exit_code = 6


class LengthMismatchError(SpikeCodecError):
    exit_code = 7


class PgmFormatError(SpikeCodecError):
    exit_code = 8


class UnsupportedMaxvalError(PgmFormatError):
    exit_code = 9


class AmbiguousOrderingError(SpikeCodecError):
    exit_code = 10


################################################################################
# Bitstream errors
################################################################################


class CorruptStreamError(SpikeCodecError):
    exit_code = 11


class SymbolCountError(CorruptStreamError):
    exit_code = 12


class ContainerMismatchError(CorruptStreamError):
    exit_code = 13


################################################################################
# Evaluation errors
################################################################################


class EmptyIntersectionError(SpikeCodecError):
    exit_code = 14


class RdCurveError(SpikeCodecError, ValueError):
    exit_code = 15
