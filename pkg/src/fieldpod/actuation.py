"""Pump decision and relay control.

A hysteresis band around the soil-moisture thresholds keeps the pump
from chattering: turn on at or below sm_low, off at or above sm_high,
hold in between.  Remote manual commands carry a TTL and take priority
over the automatic decision until they expire.  The relay itself is an
in-process simulated device; `apply` is the single mutation point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Optional

from .errors import ValidationError
from .irrigation.models import CropProfile, SoilProfile

DEFAULT_MANUAL_TTL_S = 1800.0
STALE_SAMPLE_LIMIT = 3  # missed periods before the fail-safe cuts the pump


class PumpAction(Enum):
    ON = "on"
    OFF = "off"


class CommandSource(Enum):
    AUTO = "auto"
    MANUAL = "manual"


@dataclass(frozen=True)
class DecisionPolicy:
    sm_low: float  # %VWC at or below which the pump turns on
    sm_high: float  # %VWC at or above which the pump turns off

    def __post_init__(self):
        if not (0 <= self.sm_low < self.sm_high <= 100):
            raise ValidationError(
                "policy", f"need 0 <= sm_low < sm_high <= 100, got {self.sm_low}, {self.sm_high}"
            )

    @classmethod
    def from_profiles(cls, soil: SoilProfile, crop: CropProfile) -> "DecisionPolicy":
        """Derive thresholds from the water-balance constants: turn on at
        the readily-available-water depletion, off near field capacity."""
        low = 100.0 * (soil.fc - crop.depletion_fraction_p * (soil.fc - soil.wp))
        high = 100.0 * soil.fc * 0.95
        return cls(sm_low=low, sm_high=high)


@dataclass(frozen=True)
class ActuatorCommand:
    action: PumpAction
    source: CommandSource
    timestamp: datetime
    ttl_s: Optional[float] = None  # manual only

    def __post_init__(self):
        if self.source is CommandSource.MANUAL:
            if not self.ttl_s or self.ttl_s <= 0:
                raise ValidationError("ttl_s", "manual commands need a positive ttl")
        elif self.ttl_s is not None:
            raise ValidationError("ttl_s", "auto commands carry no ttl")


@dataclass(frozen=True)
class RelayState:
    pump_on: bool = False
    since: Optional[datetime] = None
    last_source: Optional[CommandSource] = None


def decide(
    policy: DecisionPolicy, sm_percent: float, relay: RelayState, now: datetime
) -> Optional[ActuatorCommand]:
    """Automatic decision from the latest soil-moisture value, or None
    inside the hysteresis band."""
    if not (0 <= sm_percent <= 100):
        raise ValidationError("sm", f"{sm_percent} outside [0, 100] %VWC")
    if not relay.pump_on and sm_percent <= policy.sm_low:
        return ActuatorCommand(action=PumpAction.ON, source=CommandSource.AUTO, timestamp=now)
    if relay.pump_on and sm_percent >= policy.sm_high:
        return ActuatorCommand(action=PumpAction.OFF, source=CommandSource.AUTO, timestamp=now)
    return None


def expired(manual: ActuatorCommand, now: datetime) -> bool:
    return now >= manual.timestamp + timedelta(seconds=manual.ttl_s)


def merge(
    auto: Optional[ActuatorCommand],
    manual: Optional[ActuatorCommand],
    now: datetime,
) -> Optional[ActuatorCommand]:
    """An unexpired manual command wins; an expired one is discarded."""
    if manual is not None and not expired(manual, now):
        return manual
    return auto


def apply(relay: RelayState, cmd: ActuatorCommand, now: datetime) -> RelayState:
    """Idempotent relay transition; `since` moves only on actual change."""
    want_on = cmd.action is PumpAction.ON
    if relay.pump_on == want_on:
        return relay
    return replace(relay, pump_on=want_on, since=now, last_source=cmd.source)
