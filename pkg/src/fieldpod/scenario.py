"""Scenario files: declarative YAML driving a desk-scale run.

A scenario bundles the sensor source (simulated signals or a replay
CSV), the simulated Wi-Fi scan table, optional broker fault intervals,
an optional pre-committed application, weather input, and fault
injection for storage.  See README for the full schema and an example.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional

import yaml

from .errors import ScenarioError
from .netconfig import NetworkInfo, Security
from .runtime import ApplicationInput
from .sensing import SensorKind, SignalSpec, kind_from_token

DEFAULT_SIGNALS: dict[SensorKind, SignalSpec] = {
    SensorKind.TEMPERATURE: SignalSpec(baseline=24.0, amplitude=6.0, period_s=86400.0, noise=0.3),
    SensorKind.HUMIDITY: SignalSpec(baseline=60.0, amplitude=-12.0, period_s=86400.0, noise=1.0),
    SensorKind.SOIL_MOISTURE: SignalSpec(baseline=35.0, amplitude=-8.0, period_s=43200.0, noise=0.5),
}


@dataclass(frozen=True)
class SensorSource:
    mode: str = "simulated"  # or "replay"
    seed: int = 42
    step_s: float = 60.0
    signals: dict[SensorKind, SignalSpec] = field(default_factory=lambda: dict(DEFAULT_SIGNALS))
    replay_file: Optional[Path] = None


@dataclass(frozen=True)
class Scenario:
    device_id: str = "fieldpod-1"
    topic_prefix: str = "/usp"
    config_window_s: float = 120.0
    sample_period_s: float = 60.0
    sensors: SensorSource = field(default_factory=SensorSource)
    networks: tuple[NetworkInfo, ...] = ()
    use_stub_broker: bool = False
    broker_faults: tuple[tuple[float, float], ...] = ()  # sim-second down spans
    application: Optional[ApplicationInput] = None
    weather_file: Optional[Path] = None
    latitude_deg: Optional[float] = None
    manual_ttl_s: float = 1800.0
    sm_low: Optional[float] = None
    sm_high: Optional[float] = None
    storage_fail_appends_after: Optional[int] = None


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ScenarioError(message)


def _parse_signals(raw: dict) -> dict[SensorKind, SignalSpec]:
    signals = dict(DEFAULT_SIGNALS)
    for token, spec in raw.items():
        kind = kind_from_token(str(token))
        signals[kind] = SignalSpec(
            baseline=float(spec.get("baseline", 0.0)),
            amplitude=float(spec.get("amplitude", 0.0)),
            period_s=float(spec.get("period_s", 86400.0)),
            noise=float(spec.get("noise", 0.0)),
        )
    return signals


def _parse_networks(raw: list) -> tuple[NetworkInfo, ...]:
    networks = []
    for entry in raw:
        networks.append(
            NetworkInfo(
                ssid=str(entry["ssid"]),
                rssi_dbm=int(entry.get("rssi_dbm", -60)),
                security=Security(str(entry.get("security", "open")).lower()),
            )
        )
    return tuple(networks)


def _parse_faults(raw: list) -> tuple[tuple[float, float], ...]:
    spans = []
    for pair in raw:
        _require(
            isinstance(pair, (list, tuple)) and len(pair) == 2,
            f"broker fault interval must be [start, end], got {pair!r}",
        )
        start, end = float(pair[0]), float(pair[1])
        _require(start < end, f"fault interval start must precede end: {pair!r}")
        spans.append((start, end))
    spans.sort()
    for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
        _require(prev_end <= next_start, "broker fault intervals must not overlap")
    return tuple(spans)


def _parse_application(raw: dict) -> ApplicationInput:
    plant = raw["plant_date"]
    if not isinstance(plant, date):  # yaml parses ISO dates natively
        plant = date.fromisoformat(str(plant))
    return ApplicationInput(
        crop_name=str(raw["crop"]),
        soil_name=str(raw["soil"]),
        plant_date=plant,
        area_m2=float(raw.get("area_m2", 1.0)),
        flow_lph=float(raw.get("flow_lph", 600.0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario file unparsable: {exc}") from exc
    base = path.parent

    device = raw.get("device", {})
    sensors_raw = raw.get("sensors", {})
    broker = raw.get("broker", {})
    weather = raw.get("weather", {})
    actuation = raw.get("actuation", {})
    storage = raw.get("storage", {})

    mode = str(sensors_raw.get("mode", "simulated"))
    _require(mode in ("simulated", "replay"), f"sensors.mode must be simulated|replay, got {mode}")
    replay_file = None
    if mode == "replay":
        _require("replay_file" in sensors_raw, "sensors.mode=replay needs sensors.replay_file")
        replay_file = (base / str(sensors_raw["replay_file"])).resolve()
        _require(replay_file.is_file(), f"replay file not found: {replay_file}")

    weather_file = None
    if "file" in weather:
        weather_file = (base / str(weather["file"])).resolve()
        _require(weather_file.is_file(), f"weather file not found: {weather_file}")

    application = None
    if "application" in raw and raw["application"]:
        try:
            application = _parse_application(raw["application"])
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad application section: {exc}") from exc

    try:
        return Scenario(
            device_id=str(device.get("device_id", "fieldpod-1")),
            topic_prefix=str(device.get("topic_prefix", "/usp")),
            config_window_s=float(device.get("config_window_s", 120.0)),
            sample_period_s=float(device.get("sample_period_s", 60.0)),
            sensors=SensorSource(
                mode=mode,
                seed=int(sensors_raw.get("seed", 42)),
                step_s=float(sensors_raw.get("step_s", 60.0)),
                signals=_parse_signals(sensors_raw.get("signals", {})),
                replay_file=replay_file,
            ),
            networks=_parse_networks(raw.get("networks", [])),
            use_stub_broker=bool(broker.get("stub", False)),
            broker_faults=_parse_faults(broker.get("fault_intervals", [])),
            application=application,
            weather_file=weather_file,
            latitude_deg=float(weather["latitude_deg"]) if "latitude_deg" in weather else None,
            manual_ttl_s=float(actuation.get("manual_ttl_s", 1800.0)),
            sm_low=float(actuation["sm_low"]) if "sm_low" in actuation else None,
            sm_high=float(actuation["sm_high"]) if "sm_high" in actuation else None,
            storage_fail_appends_after=(
                int(storage["fail_appends_after"]) if storage.get("fail_appends_after") is not None else None
            ),
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ScenarioError(f"bad scenario value: {exc}") from exc
