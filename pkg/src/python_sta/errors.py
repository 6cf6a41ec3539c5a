class StaError(Exception):
    """Base class for every error raised by python_sta."""


class DomainError(StaError, ValueError):
    """An argument lies outside the domain of an operation, or a parameter record is invalid."""


class DegeneratePointError(StaError, ValueError):
    """Raised where a mixing angle is needed but both pulses vanish (Omega(t) = 0)."""

    def __init__(self, t: float) -> None:
        super().__init__(f"Omega(t) = 0 at t = {t!r} us, mixing angle phi is undefined")
        self.t = t


class ConvergenceError(StaError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class NormalizationError(StaError, ValueError):
    """A state vector handed to the propagator is not normalised."""


class ConfigError(StaError, ValueError):
    """A configuration value is semantically invalid."""

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class ConfigParseError(ConfigError):
    """The configuration text is not valid INI."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class MissingSectionError(ConfigError):
    """A section required by the selected protocol is absent."""

    def __init__(self, section: str, reason: str) -> None:
        super().__init__(f"missing section [{section}] ({reason})")
        self.section = section


class OutputError(StaError, OSError):
    """Writing a result file failed."""

    def __init__(self, path, cause: Exception) -> None:
        super().__init__(f"cannot write {path}: {cause}")
        self.path = path
