"""Sensor stream sampling, replay parsing, and range validation."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from fieldpod.errors import OutOfRangeError, UnsupportedKindError
from fieldpod.sensing import (
    KIND_RANGES,
    ScenarioStream,
    SensorKind,
    SensorReading,
    SignalSpec,
    sample,
    validate,
)

EPOCH = datetime(2021, 3, 1, tzinfo=timezone.utc)


def _stream(records):
    return ScenarioStream(records=records, epoch=EPOCH, device_id="dev-1")


def _reading(kind, value):
    return SensorReading(kind=kind, value=value, timestamp=EPOCH, device_id="dev-1")


class TestSample:
    def test_all_kinds_at_time_zero(self):
        stream = _stream(
            {
                SensorKind.TEMPERATURE: ((0.0, 24.5),),
                SensorKind.HUMIDITY: ((0.0, 60.0),),
                SensorKind.SOIL_MOISTURE: ((0.0, 35.0),),
            }
        )
        readings = sample(stream, 0.0)
        assert {r.kind: r.value for r in readings} == {
            SensorKind.TEMPERATURE: 24.5,
            SensorKind.HUMIDITY: 60.0,
            SensorKind.SOIL_MOISTURE: 35.0,
        }
        assert all(r.timestamp == EPOCH for r in readings)

    def test_empty_stream(self):
        assert sample(_stream({}), 1234.0) == []

    def test_latest_record_at_or_before_sim_time(self):
        stream = _stream({SensorKind.TEMPERATURE: ((0.0, 20.0), (10.0, 22.0))})
        readings = sample(stream, 9.0)
        assert len(readings) == 1
        assert readings[0].value == 20.0
        assert sample(stream, 10.0)[0].value == 22.0

    def test_kind_with_no_record_yet_is_omitted(self):
        stream = _stream(
            {
                SensorKind.TEMPERATURE: ((0.0, 20.0),),
                SensorKind.HUMIDITY: ((5.0, 50.0),),
            }
        )
        kinds = {r.kind for r in sample(stream, 2.0)}
        assert kinds == {SensorKind.TEMPERATURE}

    def test_pure_function_of_inputs(self):
        stream = _stream({SensorKind.TEMPERATURE: ((0.0, 20.0), (10.0, 22.0))})
        assert sample(stream, 7.0) == sample(stream, 7.0)

    def test_timestamp_is_record_instant(self):
        stream = _stream({SensorKind.HUMIDITY: ((30.0, 55.0),)})
        [reading] = sample(stream, 100.0)
        assert reading.timestamp == EPOCH + timedelta(seconds=30)

    @given(st.floats(min_value=0, max_value=500), st.floats(min_value=0, max_value=500))
    def test_prefix_consistency(self, t1, t2):
        # Earlier sample times never use a later record than later ones.
        t1, t2 = sorted((t1, t2))
        stream = _stream(
            {SensorKind.TEMPERATURE: tuple((i * 10.0, 20.0 + i) for i in range(20))}
        )
        early = {r.kind: r.value for r in sample(stream, t1)}
        late = {r.kind: r.value for r in sample(stream, t2)}
        for kind, value in early.items():
            assert value <= late[kind]


class TestValidate:
    def test_in_range_ok(self):
        validate(_reading(SensorKind.TEMPERATURE, 24.5))

    def test_above_range_rejected_with_bounds_in_message(self):
        with pytest.raises(OutOfRangeError) as err:
            validate(_reading(SensorKind.HUMIDITY, 120.0))
        message = str(err.value)
        assert "humid" in message and "120" in message and "100" in message

    def test_boundaries_inclusive(self):
        validate(_reading(SensorKind.SOIL_MOISTURE, 0.0))
        validate(_reading(SensorKind.SOIL_MOISTURE, 100.0))
        validate(_reading(SensorKind.TEMPERATURE, -40.0))

    @given(st.sampled_from(list(SensorKind)), st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip_property(self, kind, value):
        reading = _reading(kind, value)
        lo, hi = KIND_RANGES[kind]
        try:
            validate(reading)
        except OutOfRangeError:
            assert not (lo <= value <= hi)
        else:
            assert lo <= value <= hi


class TestReplayCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "replay.csv"
        path.write_text(
            "offset_s,kind,value\n0,temp,24.5\n0,humid,60\n0,sm,35\n60,temp,25.1\n",
            encoding="utf-8",
        )
        stream = ScenarioStream.from_replay_csv(path, epoch=EPOCH, device_id="dev-1")
        assert sample(stream, 0.0)[0].value == 24.5
        assert sample(stream, 61.0)[0].value == 25.1

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "replay.csv"
        path.write_text("offset_s,kind,value\n0,light,400\n", encoding="utf-8")
        with pytest.raises(UnsupportedKindError):
            ScenarioStream.from_replay_csv(path, epoch=EPOCH, device_id="dev-1")

    def test_non_increasing_offsets_rejected(self, tmp_path):
        path = tmp_path / "replay.csv"
        path.write_text("offset_s,kind,value\n10,temp,20\n10,temp,21\n", encoding="utf-8")
        with pytest.raises(OutOfRangeError):
            ScenarioStream.from_replay_csv(path, epoch=EPOCH, device_id="dev-1")


class TestSimulatedStream:
    def test_deterministic_for_seed(self):
        specs = {
            SensorKind.TEMPERATURE: SignalSpec(baseline=24.0, amplitude=6.0, noise=0.3),
            SensorKind.SOIL_MOISTURE: SignalSpec(baseline=35.0, amplitude=-10.0, noise=0.5),
        }
        a = ScenarioStream.simulated(specs, seed=7, step_s=60, horizon_s=3600, epoch=EPOCH, device_id="d")
        b = ScenarioStream.simulated(specs, seed=7, step_s=60, horizon_s=3600, epoch=EPOCH, device_id="d")
        assert a == b
        c = ScenarioStream.simulated(specs, seed=8, step_s=60, horizon_s=3600, epoch=EPOCH, device_id="d")
        assert a != c

    def test_values_stay_within_physical_range(self):
        specs = {SensorKind.HUMIDITY: SignalSpec(baseline=95.0, amplitude=20.0, noise=2.0)}
        stream = ScenarioStream.simulated(specs, seed=1, step_s=60, horizon_s=86400, epoch=EPOCH, device_id="d")
        for _, value in stream.records[SensorKind.HUMIDITY]:
            assert 0.0 <= value <= 100.0
