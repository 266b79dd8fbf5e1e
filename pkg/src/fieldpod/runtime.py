"""Device lifecycle state machine.

Boot enters a time-boxed configuration mode, after which the portal's
write endpoints are disabled, a one-time setup runs, and the device
settles into the perpetual monitor/publish/actuate loop.  The machine
is pure: it consumes injected monotonic instants and returns new state
snapshots plus effect descriptions; executing effects happens elsewhere.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Collection, Optional, Union

from .errors import ConfigurationError, ModeViolationError, StorageError, ValidationError


class Phase(Enum):
    CONFIG_MODE = "config"
    SETTING_UP = "setup"
    OPERATIONAL = "operational"
    FAULT = "fault"


@dataclass(frozen=True)
class DeviceState:
    phase: Phase
    boot_time: float  # monotonic instant
    deadline: Optional[float] = None  # config-mode end, monotonic instant
    fault_reason: Optional[str] = None
    last_sample_at: Optional[float] = None  # monotonic instant of last sample boundary


@dataclass(frozen=True)
class RuntimeSettings:
    config_window_s: float = 120.0
    sample_period_s: float = 60.0
    broker_address: str = "10.4.1.100:1883"
    topic_prefix: str = "/usp"
    device_id: str = "fieldpod-1"
    time_scale: float = 1.0

    def validate(self) -> None:
        if self.config_window_s <= 0:
            raise ConfigurationError("config_window_s", "must be positive")
        if self.sample_period_s <= 0:
            raise ConfigurationError("sample_period_s", "must be positive")
        if self.time_scale <= 0:
            raise ConfigurationError("time_scale", "must be positive")
        if not self.topic_prefix.startswith("/"):
            raise ConfigurationError("topic_prefix", 'must begin with "/"')
        if not self.device_id:
            raise ConfigurationError("device_id", "must be nonempty")
        if ":" not in self.broker_address:
            raise ConfigurationError("broker_address", "expected host:port")


@dataclass(frozen=True)
class ApplicationInput:
    crop_name: str
    soil_name: str
    plant_date: date
    area_m2: float
    flow_lph: float

    def __post_init__(self):
        if self.area_m2 <= 0:
            raise ValidationError("area_m2", "must be positive")
        if self.flow_lph <= 0:
            raise ValidationError("flow_lph", "must be positive")
        if not isinstance(self.plant_date, date):
            raise ValidationError("plant_date", "must be a calendar date")


# Effects are descriptions of work for the control loop, never actions.

@dataclass(frozen=True)
class DisablePortalConfig:
    pass


@dataclass(frozen=True)
class RunOneTimeSetup:
    with_application: bool


@dataclass(frozen=True)
class SampleSensors:
    at: float  # the monotonic boundary instant the sample belongs to


Effect = Union[DisablePortalConfig, RunOneTimeSetup, SampleSensors]


def boot(settings: RuntimeSettings, now: float) -> DeviceState:
    """Enter configuration mode; the window is the nominal length divided
    by the simulation speed-up."""
    settings.validate()
    return DeviceState(
        phase=Phase.CONFIG_MODE,
        boot_time=now,
        deadline=now + settings.config_window_s / settings.time_scale,
    )


def tick(
    state: DeviceState,
    now: float,
    inputs_committed: bool,
    settings: RuntimeSettings,
) -> tuple[DeviceState, list[Effect]]:
    """Advance the lifecycle one step.

    Config mode holds until the deadline, then emits DisablePortalConfig;
    the next tick performs the one-time setup; operational ticks emit a
    SampleSensors effect whenever a sample-period boundary has passed.
    Fault is absorbing.
    """
    if state.phase is Phase.FAULT:
        return state, []

    if state.phase is Phase.CONFIG_MODE:
        if now < state.deadline:
            return state, []
        return replace(state, phase=Phase.SETTING_UP), [DisablePortalConfig()]

    if state.phase is Phase.SETTING_UP:
        return (
            replace(state, phase=Phase.OPERATIONAL, last_sample_at=None),
            [RunOneTimeSetup(with_application=inputs_committed)],
        )

    # Operational: sample on period boundaries (wall period = nominal / scale).
    period = settings.sample_period_s / settings.time_scale
    if state.last_sample_at is None:
        return replace(state, last_sample_at=now), [SampleSensors(at=now)]
    elapsed = now - state.last_sample_at
    if elapsed < period:
        return state, []
    # Catch up to the most recent boundary but emit a single sample: the
    # publisher must never fabricate intermediate data.
    boundary = state.last_sample_at + math.floor(elapsed / period) * period
    return replace(state, last_sample_at=boundary), [SampleSensors(at=boundary)]


def fault(state: DeviceState, reason: str) -> DeviceState:
    return replace(state, phase=Phase.FAULT, fault_reason=reason)


class DeviceStore:
    """Device data file: committed application input plus network config.

    A single UTF-8 JSON object, written atomically.  Unrecoverable I/O
    failures surface as StorageError and put the device into Fault.
    """

    FILENAME = "device.json"

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.path = self.data_dir / self.FILENAME

    def load(self) -> dict:
        if not self.path.exists():
            return {}
        try:
            return json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageError(f"device data file unreadable: {exc}") from exc

    def save(self, data: dict) -> None:
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            tmp = self.path.with_suffix(".tmp")
            tmp.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")
            os.replace(tmp, self.path)
        except OSError as exc:
            raise StorageError(f"device data file unwritable: {exc}") from exc

    def load_application(self) -> Optional[ApplicationInput]:
        data = self.load()
        if "crop" not in data:
            return None
        try:
            return ApplicationInput(
                crop_name=data["crop"],
                soil_name=data["soil"],
                plant_date=date.fromisoformat(data["plant_date"]),
                area_m2=float(data["area_m2"]),
                flow_lph=float(data["flow_lph"]),
            )
        except (KeyError, ValueError) as exc:
            raise StorageError(f"device data file malformed: {exc}") from exc

    def save_application(self, app: ApplicationInput) -> None:
        data = self.load()
        data.update(
            {
                "crop": app.crop_name,
                "soil": app.soil_name,
                "plant_date": app.plant_date.isoformat(),
                "area_m2": app.area_m2,
                "flow_lph": app.flow_lph,
            }
        )
        self.save(data)

    def save_network(self, network: dict) -> None:
        data = self.load()
        data["network"] = network
        self.save(data)

    def load_network(self) -> Optional[dict]:
        return self.load().get("network")


def commit_application(
    state: DeviceState,
    app: ApplicationInput,
    known_crops: Collection[str],
    known_soils: Collection[str],
    store: DeviceStore,
) -> DeviceState:
    """Validate and persist the user's application input.

    Only legal during configuration mode; the phase itself is unchanged.
    """
    if state.phase is not Phase.CONFIG_MODE:
        raise ModeViolationError(
            f"application input only accepted in config mode (phase is {state.phase.value})"
        )
    if app.crop_name not in known_crops:
        raise ValidationError("crop", f"unknown crop {app.crop_name!r}")
    if app.soil_name not in known_soils:
        raise ValidationError("soil", f"unknown soil {app.soil_name!r}")
    store.save_application(app)
    return state
