"""Exception types shared across the package."""


class CombAdcError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CombAdcError):
    """A config file or parameter set is malformed or inconsistent.

    Carries an optional line number so the CLI can point at the offending
    line of a config file.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SignalError(CombAdcError):
    """A waveform does not satisfy a precondition (rate, length, headroom)."""


class EqualizerError(CombAdcError):
    """Adaptive equalization diverged or failed to improve on the raw samples."""


class MeasurementError(CombAdcError):
    """A metric could not be extracted from a capture.

    Raised e.g. when the expected tone is indistinguishable from the noise
    floor, so the caller can record the failure and move on instead of
    reporting a garbage number.
    """
