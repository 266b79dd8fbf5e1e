"""Injected clocks.

The device never reads ambient time inside its state machine: every
component takes monotonic instants from a clock object so tests can run
on a manual clock and accelerated runs can divide nominal durations by a
speed-up factor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone


class WallClock:
    """Real monotonic clock."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class ManualClock:
    """Test clock advanced explicitly; sleep() advances it."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("clock cannot move backwards")
        self._now += seconds

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)


@dataclass
class DeviceClock:
    """Wall-anchored device timeline with a simulation speed-up.

    Simulated time runs `time_scale` times faster than the wall: a
    nominal duration of d device-seconds lasts d / time_scale wall
    seconds.  `epoch_utc` is the simulated UTC instant at boot.
    """

    source: WallClock | ManualClock
    time_scale: float = 1.0
    epoch_utc: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc).replace(microsecond=0)
    )
    boot_mono: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")
        if self.boot_mono is None:
            self.boot_mono = self.source.now()

    def monotonic(self) -> float:
        return self.source.now()

    def to_wall(self, nominal_seconds: float) -> float:
        """Wall-clock duration of a nominal device duration."""
        return nominal_seconds / self.time_scale

    def sim_elapsed(self, at: float | None = None) -> float:
        """Device-seconds elapsed since boot at monotonic instant `at`."""
        instant = self.monotonic() if at is None else at
        return (instant - self.boot_mono) * self.time_scale

    def utc_at(self, at: float | None = None) -> datetime:
        """Simulated UTC datetime at monotonic instant `at`, seconds resolution."""
        elapsed = self.sim_elapsed(at)
        return (self.epoch_utc + timedelta(seconds=elapsed)).replace(microsecond=0)

    def sleep_wall(self, seconds: float) -> None:
        self.source.sleep(seconds)
