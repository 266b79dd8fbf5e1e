"""Injected clocks: scaling, simulated UTC, manual advancement."""

from datetime import datetime, timedelta, timezone

import pytest

from fieldpod.clock import DeviceClock, ManualClock, WallClock

EPOCH = datetime(2021, 3, 1, tzinfo=timezone.utc)


def test_manual_clock_advances_only_forward():
    clock = ManualClock(start=10.0)
    clock.advance(5.0)
    assert clock.now() == 15.0
    with pytest.raises(ValueError):
        clock.advance(-1.0)


def test_manual_sleep_advances_time():
    clock = ManualClock()
    clock.sleep(2.5)
    assert clock.now() == 2.5


def test_device_clock_scales_durations_and_elapsed():
    source = ManualClock(start=100.0)
    clock = DeviceClock(source, time_scale=60.0, epoch_utc=EPOCH)
    assert clock.to_wall(120.0) == pytest.approx(2.0)
    source.advance(2.0)
    assert clock.sim_elapsed() == pytest.approx(120.0)


def test_device_clock_simulated_utc():
    source = ManualClock(start=0.0)
    clock = DeviceClock(source, time_scale=600.0, epoch_utc=EPOCH)
    source.advance(1.0)  # one wall second = 600 device seconds
    assert clock.utc_at() == EPOCH + timedelta(seconds=600)


def test_device_clock_elapsed_at_instant():
    source = ManualClock(start=50.0)
    clock = DeviceClock(source, time_scale=2.0, epoch_utc=EPOCH)
    assert clock.sim_elapsed(at=53.0) == pytest.approx(6.0)
    assert clock.utc_at(at=53.0) == EPOCH + timedelta(seconds=6)


def test_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        DeviceClock(ManualClock(), time_scale=0.0, epoch_utc=EPOCH)


def test_wall_clock_monotonicity():
    clock = WallClock()
    a = clock.now()
    clock.sleep(0.01)
    assert clock.now() >= a
