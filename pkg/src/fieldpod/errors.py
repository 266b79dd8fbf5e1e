"""Exception hierarchy shared by all fieldpod modules."""


class FieldPodError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(FieldPodError):
    """Invalid runtime settings; message names the offending field."""

    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}")
        self.field = field


class ValidationError(FieldPodError):
    """User-supplied input rejected; message names the offending field."""

    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}")
        self.field = field


class ModeViolationError(FieldPodError):
    """A write was attempted outside the configuration window."""


class NotFoundError(FieldPodError):
    """A referenced entity does not exist."""


class UnsupportedKindError(FieldPodError):
    """Sensor kind not in the active catalogue."""


class OutOfRangeError(FieldPodError):
    """A value fell outside its physical or seasonal bounds."""


class TransportError(FieldPodError):
    """Broker unreachable or the connection failed mid-exchange."""


class StorageError(FieldPodError):
    """Unrecoverable persistence failure; the device enters Fault."""


class BacklogCorruptionError(StorageError):
    """Backlog file damaged beyond torn-tail recovery."""


class MissingWeatherError(FieldPodError):
    """Weather history has a gap; message names the missing date."""

    def __init__(self, date):
        super().__init__(f"no weather data for {date.isoformat()}")
        self.date = date


class ScenarioError(FieldPodError):
    """Scenario file missing, unreadable, or inconsistent."""
