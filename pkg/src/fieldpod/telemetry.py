"""Telemetry records: topic scheme and payload encoding.

Each sensor kind maps to one topic leaf under the configured prefix
(default "/usp"): temp, humid, sm.  Payloads are bare ASCII decimals
with exactly one fractional digit, no unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import ROUND_HALF_UP, Decimal

from .errors import UnsupportedKindError
from .sensing import SensorKind, SensorReading

DEFAULT_PREFIX = "/usp"

TOPIC_LEAVES: dict[SensorKind, str] = {
    SensorKind.TEMPERATURE: "temp",
    SensorKind.HUMIDITY: "humid",
    SensorKind.SOIL_MOISTURE: "sm",
}


def topic_for(kind: SensorKind, prefix: str = DEFAULT_PREFIX) -> str:
    if not prefix.startswith("/"):
        raise ValueError(f'topic prefix must begin with "/", got {prefix!r}')
    leaf = TOPIC_LEAVES.get(kind)
    if leaf is None:
        raise UnsupportedKindError(f"no topic for sensor kind {kind!r}")
    return f"{prefix}/{leaf}"


def command_topic(prefix: str = DEFAULT_PREFIX) -> str:
    return f"{prefix}/cmd/pump"


def status_topic(prefix: str = DEFAULT_PREFIX) -> str:
    return f"{prefix}/status/pump"


def encode_payload(reading: SensorReading) -> bytes:
    """ASCII decimal with one fractional digit, round half away from zero."""
    quantized = Decimal(repr(reading.value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return str(quantized).encode("ascii")


@dataclass(frozen=True)
class TelemetryRecord:
    seq: int  # strictly increasing per device
    topic: str
    payload: bytes
    timestamp: datetime  # UTC, seconds resolution

    def __post_init__(self):
        if b"\n" in self.payload or b"\r" in self.payload:
            raise ValueError("payload must not contain line breaks")


def record_for(reading: SensorReading, seq: int, prefix: str = DEFAULT_PREFIX) -> TelemetryRecord:
    return TelemetryRecord(
        seq=seq,
        topic=topic_for(reading.kind, prefix),
        payload=encode_payload(reading),
        timestamp=reading.timestamp,
    )
