"""Domain types for the irrigation engine.

Water depths are mm over the irrigated area; 1 mm over 1 m² equals one
liter.  Soil moisture is volumetric (m³ water per m³ soil, or %VWC when
scaled by 100).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

from ..errors import ValidationError

STAGE_NAMES = ("initial", "development", "mid", "late")


@dataclass(frozen=True)
class CropProfile:
    name: str
    stage_len: tuple[int, int, int, int]  # days per growth stage
    kc_ini: float
    kc_mid: float
    kc_end: float
    root_depth_m: float
    depletion_fraction_p: float

    def __post_init__(self):
        if len(self.stage_len) != 4 or any(n <= 0 for n in self.stage_len):
            raise ValidationError("stage_len", "four positive day counts required")
        for label, kc in (("kc_ini", self.kc_ini), ("kc_mid", self.kc_mid), ("kc_end", self.kc_end)):
            if not (0 < kc <= 2):
                raise ValidationError(label, f"{kc} outside (0, 2]")
        if self.root_depth_m <= 0:
            raise ValidationError("root_depth_m", "must be positive")
        if not (0 < self.depletion_fraction_p < 1):
            raise ValidationError("depletion_fraction_p", "must be in (0, 1)")

    @property
    def season_days(self) -> int:
        return sum(self.stage_len)


@dataclass(frozen=True)
class SoilProfile:
    name: str
    fc: float  # field capacity, volumetric fraction
    wp: float  # wilting point, volumetric fraction

    def __post_init__(self):
        if not (0 < self.wp < self.fc < 1):
            raise ValidationError("soil", f"need 0 < wp < fc < 1, got wp={self.wp} fc={self.fc}")


@dataclass(frozen=True)
class WeatherDay:
    date: date
    tmin_c: float
    tmax_c: float
    rain_mm: float

    def __post_init__(self):
        if self.tmin_c > self.tmax_c:
            raise ValidationError("tmin_c", f"{self.tmin_c} exceeds tmax_c {self.tmax_c}")
        if self.rain_mm < 0:
            raise ValidationError("rain_mm", "must be >= 0")


@dataclass(frozen=True)
class StageEntry:
    name: str
    start: date
    length_days: int


@dataclass(frozen=True)
class StagePlan:
    stages: tuple[StageEntry, StageEntry, StageEntry, StageEntry]

    @property
    def plant_date(self) -> date:
        return self.stages[0].start

    @property
    def season_end(self) -> date:
        """First day after the season."""
        last = self.stages[-1]
        return last.start + timedelta(days=last.length_days)


@dataclass(frozen=True)
class IrrigationEvent:
    date: date
    net_depth_mm: float
    gross_depth_mm: float  # net / application efficiency
    runtime_min: float


@dataclass(frozen=True)
class DayBalance:
    """One day of the water-balance trace, for inspection and export."""

    date: date
    et0_mm: float
    kc: float
    etc_mm: float
    rain_mm: float
    depletion_mm: float  # end of day, after any irrigation
    etc_applied_mm: float  # demand actually drawn (capped at total available water)
    rain_applied_mm: float  # rain retained in the root zone (excess drains)
    irrigation_net_mm: float


@dataclass(frozen=True)
class IrrigationPlan:
    stage_plan: StagePlan
    events: tuple[IrrigationEvent, ...]
    taw_mm: float  # total available water = 1000 * (fc - wp) * root depth
    raw_mm: float  # readily available water = p * taw
    trace: tuple[DayBalance, ...] = field(default=(), repr=False)

    def __post_init__(self):
        for a, b in zip(self.events, self.events[1:]):
            if a.date >= b.date:
                raise ValidationError("events", "must be strictly date-ordered")


def total_available_water_mm(soil: SoilProfile, crop: CropProfile) -> float:
    return 1000.0 * (soil.fc - soil.wp) * crop.root_depth_m


def readily_available_water_mm(soil: SoilProfile, crop: CropProfile) -> float:
    return crop.depletion_fraction_p * total_available_water_mm(soil, crop)
