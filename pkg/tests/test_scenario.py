"""Scenario file parsing and validation."""

from datetime import date

import pytest

from fieldpod.errors import ScenarioError
from fieldpod.netconfig import Security
from fieldpod.scenario import load_scenario
from fieldpod.sensing import SensorKind

FULL = """
device:
  device_id: pod-9
  topic_prefix: /garden
  config_window_s: 60
  sample_period_s: 30
sensors:
  mode: simulated
  seed: 11
  step_s: 30
  signals:
    temp: {baseline: 22, amplitude: 4, period_s: 86400, noise: 0.2}
    sm: {baseline: 40, amplitude: -5}
networks:
  - {ssid: HomeLAN, rssi_dbm: -50, security: wpa2}
  - {ssid: Cafe, rssi_dbm: -70, security: open}
broker:
  stub: true
  fault_intervals: [[120, 240], [400, 500]]
application:
  crop: beans
  soil: loam
  plant_date: 2021-03-01
  area_m2: 2
  flow_lph: 600
actuation:
  manual_ttl_s: 900
  sm_low: 18
  sm_high: 32
"""


def _write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_full_scenario_parses(tmp_path):
    scenario = load_scenario(_write(tmp_path, FULL))
    assert scenario.device_id == "pod-9"
    assert scenario.topic_prefix == "/garden"
    assert scenario.sample_period_s == 30.0
    assert scenario.sensors.signals[SensorKind.TEMPERATURE].baseline == 22.0
    assert [n.ssid for n in scenario.networks] == ["HomeLAN", "Cafe"]
    assert scenario.networks[0].security is Security.WPA2
    assert scenario.use_stub_broker
    assert scenario.broker_faults == ((120.0, 240.0), (400.0, 500.0))
    assert scenario.application.crop_name == "beans"
    assert scenario.application.plant_date == date(2021, 3, 1)
    assert scenario.manual_ttl_s == 900.0
    assert scenario.sm_low == 18.0


def test_defaults_for_empty_file(tmp_path):
    scenario = load_scenario(_write(tmp_path, "{}"))
    assert scenario.device_id == "fieldpod-1"
    assert scenario.topic_prefix == "/usp"
    assert scenario.config_window_s == 120.0
    assert scenario.sensors.mode == "simulated"
    assert SensorKind.SOIL_MOISTURE in scenario.sensors.signals


def test_missing_file_raises(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.yaml")


def test_overlapping_fault_intervals_rejected(tmp_path):
    text = "broker:\n  fault_intervals: [[0, 100], [50, 150]]\n"
    with pytest.raises(ScenarioError):
        load_scenario(_write(tmp_path, text))


def test_replay_mode_requires_existing_file(tmp_path):
    text = "sensors:\n  mode: replay\n  replay_file: missing.csv\n"
    with pytest.raises(ScenarioError):
        load_scenario(_write(tmp_path, text))


def test_replay_file_resolved_relative_to_scenario(tmp_path):
    (tmp_path / "trace.csv").write_text("offset_s,kind,value\n0,temp,20\n", encoding="utf-8")
    text = "sensors:\n  mode: replay\n  replay_file: trace.csv\n"
    scenario = load_scenario(_write(tmp_path, text))
    assert scenario.sensors.replay_file == (tmp_path / "trace.csv").resolve()


def test_unknown_sensor_kind_rejected(tmp_path):
    text = "sensors:\n  signals:\n    light: {baseline: 100}\n"
    with pytest.raises(Exception):
        load_scenario(_write(tmp_path, text))
