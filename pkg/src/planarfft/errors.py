"""Exception hierarchy shared by all planarfft modules."""


class PlanarFFTError(Exception):
    """Base class for every error raised by planarfft."""


class InvalidArgumentError(PlanarFFTError, ValueError):
    """An argument is malformed (empty input, mismatched dimensions, ...)."""


class UnsupportedSizeError(PlanarFFTError, ValueError):
    """A transform length is valid data but not a supported size (non power of two)."""


class UnsupportedDecompositionError(PlanarFFTError, ValueError):
    """A grid cannot be distributed over the requested number of ranks."""


class ProtocolError(PlanarFFTError, RuntimeError):
    """A collective operation was aborted because a rank broke the protocol."""

    def __init__(self, message, offender=None):
        super().__init__(message)
        self.offender = offender


class PlanningFailedError(PlanarFFTError, RuntimeError):
    """Timing a planner candidate failed."""

    def __init__(self, message, candidate=None):
        super().__init__(message)
        self.candidate = candidate


class WisdomParseError(PlanarFFTError, ValueError):
    """A wisdom file could not be parsed."""

    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ConfigError(PlanarFFTError, ValueError):
    """A benchmark configuration is invalid; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
