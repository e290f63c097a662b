"""
Exception hierarchy for the cluster simulator
"""

from typing import Iterable, Optional


class SimulatorError(Exception):
    """Base class for every error raised by the simulator"""


class ValidationError(SimulatorError, ValueError):
    """Invalid user input: configuration, trace rows, placements"""


class ConfigError(ValidationError):
    """Configuration is malformed, incomplete or inconsistent"""

    def __init__(self, message: str, issues: Optional[Iterable[str]] = None):
        self.issues = list(issues) if issues else [message]
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.args[0], self.issues)

    @classmethod
    def from_issues(cls, issues: Iterable[str]) -> "ConfigError":
        issues = list(issues)
        lines = "\n".join(f"  - {issue}" for issue in issues)
        return cls(f"Configuration validation failed:\n{lines}", issues)


class TraceParseError(ValidationError):
    def __init__(self, message: str, line_number: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line_number = line_number
        self.path = path
        location = ""
        if path:
            location = f"{path}:"
        if line_number is not None:
            location = f"{location}{line_number}: "
        elif location:
            location = f"{location} "
        super().__init__(f"{location}{message}")

    def __reduce__(self):
        return type(self), (self.message, self.line_number, self.path)


class InfeasibleDemandError(ValidationError):
    """A job demands more GPUs than the whole cluster holds"""


class MissingProfileError(ValidationError):
    def __init__(self, model_name: str, detail: str = "no profile"):
        self.model_name = model_name
        self.detail = detail
        super().__init__(f"Model '{model_name}': {detail}")

    def __reduce__(self):
        return type(self), (self.model_name, self.detail)


class LedgerCorruptionError(SimulatorError):
    """Over-allocation or over-release of GPUs. Always an engine bug."""


class EngineInvariantError(SimulatorError):
    """The engine reached a state that violates its own invariants"""


class HorizonExceededError(SimulatorError):
    def __init__(self, horizon: float, stuck_jobs: Iterable[str]):
        self.horizon = horizon
        self.stuck_jobs = sorted(stuck_jobs)
        preview = ", ".join(self.stuck_jobs[:20])
        if len(self.stuck_jobs) > 20:
            preview += f", ... ({len(self.stuck_jobs)} total)"
        super().__init__(
            f"Simulation passed horizon of {horizon:g} s with unfinished jobs: {preview}"
        )

    def __reduce__(self):
        return type(self), (self.horizon, self.stuck_jobs)


class IncompleteRunError(SimulatorError):
    """Metrics requested for a run that still has unfinished jobs"""


class OutputError(SimulatorError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Could not write {self.path}: {reason}")

    def __reduce__(self):
        return type(self), (self.path, self.reason)
