"""Exception classes for netwave."""

from typing import Any, List, Optional, Sequence


class NetwaveException(Exception):
    """Base exception for all netwave errors."""
    pass


class ValidationError(NetwaveException):
    """Raised when a domain object violates one of its invariants."""
    pass


class ConfigurationError(NetwaveException):
    """Raised when a network document or settings file is invalid."""

    def __init__(self, message: str, path: Optional[str] = None,
                 config_file: Optional[str] = None):
        if path and not message.startswith(path):
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.config_file = config_file


class FluxDomainError(NetwaveException):
    """Raised when a density lies outside [0, 1] or a derivative is taken at the kink."""

    def __init__(self, message: str, value: float):
        super().__init__(message)
        self.value = value


class InfeasibleFluxError(NetwaveException):
    """Raised when a flux level above the maximum is inverted."""

    def __init__(self, message: str, flux: float, fmax: float):
        super().__init__(message)
        self.flux = flux
        self.fmax = fmax


class ParameterError(NetwaveException):
    """Raised when a model or scenario parameter is out of range."""

    def __init__(self, message: str, name: str, value: Any):
        super().__init__(message)
        self.name = name
        self.value = value


class ScenarioError(NetwaveException):
    """Raised when a scenario cannot be built."""
    pass


class SnapshotRangeError(NetwaveException):
    """Raised when a snapshot is requested outside the current inter-event interval."""

    def __init__(self, message: str, t: float, valid: Sequence[float]):
        super().__init__(message)
        self.t = t
        self.valid = tuple(valid)


class RunawayError(NetwaveException):
    """Raised when a run exceeds the event-count circuit breaker."""

    def __init__(self, message: str, last_events: Optional[List[Any]] = None):
        super().__init__(message)
        self.last_events = last_events or []


class EngineConsistencyError(NetwaveException):
    """Raised when the tracking engine detects a broken internal invariant.

    This signals a bug in the engine, never bad user input.
    """

    def __init__(self, message: str, event: Any = None, context: Optional[dict] = None):
        super().__init__(message)
        self.event = event
        self.context = context or {}
