"""Sensor abstraction: deterministic simulators and CSV replay.

The physical sensor set (ambient temperature, ambient humidity, soil
moisture) is replaced by a `ScenarioStream` of timestamped records.
Sampling is a pure lookup: the latest record per kind at or before the
requested simulation time.
"""

from __future__ import annotations

import csv
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path

from .errors import OutOfRangeError, UnsupportedKindError


class SensorKind(str, Enum):
    """Active sensor catalogue for the farming application.

    The enum value doubles as the replay-CSV token and the MQTT topic
    leaf.  Extending the catalogue means adding a member plus entries in
    KIND_RANGES/KIND_UNITS; tokens outside the catalogue are rejected at
    sampling time.
    """

    TEMPERATURE = "temp"
    HUMIDITY = "humid"
    SOIL_MOISTURE = "sm"


# Conventional commodity-sensor spans; configuration constants, not physics.
KIND_RANGES: dict[SensorKind, tuple[float, float]] = {
    SensorKind.TEMPERATURE: (-40.0, 85.0),
    SensorKind.HUMIDITY: (0.0, 100.0),
    SensorKind.SOIL_MOISTURE: (0.0, 100.0),
}

KIND_UNITS: dict[SensorKind, str] = {
    SensorKind.TEMPERATURE: "°C",
    SensorKind.HUMIDITY: "%RH",
    SensorKind.SOIL_MOISTURE: "%VWC",
}


def kind_from_token(token: str) -> SensorKind:
    try:
        return SensorKind(token)
    except ValueError:
        raise UnsupportedKindError(
            f"sensor kind {token!r} is not in the active catalogue "
            f"({', '.join(k.value for k in SensorKind)})"
        ) from None


@dataclass(frozen=True)
class SensorReading:
    kind: SensorKind
    value: float
    timestamp: datetime  # UTC, seconds resolution
    device_id: str


@dataclass(frozen=True)
class SignalSpec:
    """Sinusoid plus seeded uniform noise for one simulated kind."""

    baseline: float
    amplitude: float = 0.0
    period_s: float = 86400.0
    noise: float = 0.0


@dataclass(frozen=True)
class ScenarioStream:
    """Ordered (offset, value) records per kind with a fixed UTC epoch.

    Records are materialized up front so sampling stays a pure function
    of (stream, sim_time).
    """

    records: dict[SensorKind, tuple[tuple[float, float], ...]]
    epoch: datetime
    device_id: str

    @classmethod
    def from_replay_csv(cls, path: str | Path, epoch: datetime, device_id: str) -> "ScenarioStream":
        """Load a replay file: header `offset_s,kind,value`, kind in {temp,humid,sm}."""
        per_kind: dict[SensorKind, list[tuple[float, float]]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["offset_s", "kind", "value"]:
                raise OutOfRangeError(
                    f"replay file {path}: expected header offset_s,kind,value, "
                    f"got {reader.fieldnames}"
                )
            for row in reader:
                kind = kind_from_token(row["kind"])
                offset = float(row["offset_s"])
                rows = per_kind.setdefault(kind, [])
                if rows and offset <= rows[-1][0]:
                    raise OutOfRangeError(
                        f"replay file {path}: offsets for {kind.value} must be "
                        f"strictly increasing (got {offset} after {rows[-1][0]})"
                    )
                rows.append((offset, float(row["value"])))
        return cls(
            records={k: tuple(v) for k, v in per_kind.items()},
            epoch=epoch,
            device_id=device_id,
        )

    @classmethod
    def simulated(
        cls,
        specs: dict[SensorKind, SignalSpec],
        seed: int,
        step_s: float,
        horizon_s: float,
        epoch: datetime,
        device_id: str,
    ) -> "ScenarioStream":
        """Materialize sinusoid+noise records every `step_s` up to `horizon_s`."""
        if step_s <= 0:
            raise ValueError("step_s must be positive")
        records: dict[SensorKind, tuple[tuple[float, float], ...]] = {}
        n = int(horizon_s // step_s) + 1
        for kind, spec in specs.items():
            rng = random.Random(f"{seed}:{kind.value}")
            lo, hi = KIND_RANGES[kind]
            rows = []
            for i in range(n):
                offset = i * step_s
                value = spec.baseline
                if spec.amplitude:
                    value += spec.amplitude * math.sin(2 * math.pi * offset / spec.period_s)
                if spec.noise:
                    value += rng.uniform(-spec.noise, spec.noise)
                rows.append((offset, round(min(hi, max(lo, value)), 2)))
            records[kind] = tuple(rows)
        return cls(records=records, epoch=epoch, device_id=device_id)


def sample(stream: ScenarioStream, sim_time: float) -> list[SensorReading]:
    """Latest record per kind with offset <= sim_time; kinds without one are omitted.

    Pure: identical (stream, sim_time) always yields identical readings.
    Reading timestamps are the record's own instant (epoch + offset).
    """
    if sim_time < 0:
        raise ValueError("sim_time must be >= 0")
    readings = []
    for kind in SensorKind:
        rows = stream.records.get(kind)
        if not rows:
            continue
        idx = bisect_right(rows, (sim_time, float("inf"))) - 1
        if idx < 0:
            continue
        offset, value = rows[idx]
        ts = (stream.epoch + timedelta(seconds=offset)).replace(microsecond=0)
        readings.append(
            SensorReading(kind=kind, value=value, timestamp=ts, device_id=stream.device_id)
        )
    return readings


def validate(reading: SensorReading) -> None:
    """Range gate: raises OutOfRangeError naming kind, value and bounds.

    A failing reading signals a sensor fault and is dropped, never published.
    """
    lo, hi = KIND_RANGES[reading.kind]
    if not (lo <= reading.value <= hi):
        raise OutOfRangeError(
            f"{reading.kind.value} reading {reading.value} outside "
            f"[{lo}, {hi}] {KIND_UNITS[reading.kind]}"
        )
