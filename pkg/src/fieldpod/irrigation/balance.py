"""Daily root-zone water balance and irrigation scheduling.

Depletion D is the water deficit below field capacity in mm.  Each day
D grows by crop evapotranspiration (ET0 * Kc) and shrinks by rain; when
the end-of-day depletion would reach the readily-available-water
threshold, an irrigation event refills the root zone to zero depletion.
"""

from __future__ import annotations

from datetime import date, timedelta
from typing import Callable, Iterable, Mapping

from ..errors import MissingWeatherError, OutOfRangeError
from ..runtime import ApplicationInput
from .et0 import et0_hargreaves
from .models import (
    STAGE_NAMES,
    CropProfile,
    DayBalance,
    IrrigationEvent,
    IrrigationPlan,
    SoilProfile,
    StageEntry,
    StagePlan,
    WeatherDay,
    readily_available_water_mm,
    total_available_water_mm,
)

Et0Model = Callable[[WeatherDay, float], float]

DEFAULT_EFFICIENCY = 0.9  # drip application


def stage_plan(crop: CropProfile, plant_date: date) -> StagePlan:
    """Growth-stage calendar: each stage starts where the previous ends."""
    entries = []
    start = plant_date
    for name, length in zip(STAGE_NAMES, crop.stage_len):
        entries.append(StageEntry(name=name, start=start, length_days=length))
        start = start + timedelta(days=length)
    return StagePlan(stages=tuple(entries))


def kc_on(crop: CropProfile, days_after_planting: float) -> float:
    """Crop coefficient on a given day: FAO-style four-stage trapezoid.

    Constant kc_ini over the initial stage, linear rise to kc_mid
    reaching it on the first mid-stage day, constant kc_mid, then a
    linear tail that reaches kc_end on the last day of the season.
    """
    d = days_after_planting
    if not (0 <= d < crop.season_days):
        raise OutOfRangeError(
            f"day {d} outside growing season [0, {crop.season_days})"
        )
    l_ini, l_dev, l_mid, l_late = crop.stage_len
    if d < l_ini:
        return crop.kc_ini
    if d < l_ini + l_dev:
        return crop.kc_ini + ((d - l_ini) / l_dev) * (crop.kc_mid - crop.kc_ini)
    if d < l_ini + l_dev + l_mid:
        return crop.kc_mid
    if l_late == 1:
        return crop.kc_end
    late_start = l_ini + l_dev + l_mid
    return crop.kc_mid + ((d - late_start) / (l_late - 1)) * (crop.kc_end - crop.kc_mid)


def runtime_minutes(gross_depth_mm: float, area_m2: float, flow_lph: float) -> float:
    """Pump runtime: 1 mm over 1 m² is 1 liter."""
    liters = gross_depth_mm * area_m2
    return (liters / flow_lph) * 60.0


def _weather_index(weather: Iterable[WeatherDay]) -> dict[date, WeatherDay]:
    return {w.date: w for w in weather}


def _step_days(
    *,
    first_day: date,
    last_day: date,
    plant_date: date,
    depletion_mm: float,
    crop: CropProfile,
    weather_by_date: Mapping[date, WeatherDay],
    taw: float,
    raw: float,
    efficiency: float,
    area_m2: float,
    flow_lph: float,
    latitude_rad: float,
    et0_model: Et0Model,
) -> tuple[list[IrrigationEvent], list[DayBalance], float]:
    """Run the balance over [first_day, last_day], returning events, trace, final D."""
    events: list[IrrigationEvent] = []
    trace: list[DayBalance] = []
    depletion = depletion_mm
    day = first_day
    while day <= last_day:
        wd = weather_by_date.get(day)
        if wd is None:
            raise MissingWeatherError(day)
        et0 = et0_model(wd, latitude_rad)
        kc = kc_on(crop, (day - plant_date).days)
        etc = et0 * kc

        pre = depletion + etc - wd.rain_mm
        etc_applied = etc
        rain_applied = wd.rain_mm
        if pre > taw:  # root zone cannot dry beyond the wilting point
            etc_applied = etc - (pre - taw)
            pre = taw
        elif pre < 0:  # rain beyond field capacity drains away
            rain_applied = wd.rain_mm + pre
            pre = 0.0

        irrigation = 0.0
        if pre >= raw:
            gross = pre / efficiency
            events.append(
                IrrigationEvent(
                    date=day,
                    net_depth_mm=pre,
                    gross_depth_mm=gross,
                    runtime_min=runtime_minutes(gross, area_m2, flow_lph),
                )
            )
            irrigation = pre
            depletion = 0.0
        else:
            depletion = pre

        trace.append(
            DayBalance(
                date=day,
                et0_mm=et0,
                kc=kc,
                etc_mm=etc,
                rain_mm=wd.rain_mm,
                depletion_mm=depletion,
                etc_applied_mm=etc_applied,
                rain_applied_mm=rain_applied,
                irrigation_net_mm=irrigation,
            )
        )
        day += timedelta(days=1)
    return events, trace, depletion


def simulate_balance(
    app_input: ApplicationInput,
    crop: CropProfile,
    soil: SoilProfile,
    weather: Iterable[WeatherDay],
    efficiency: float = DEFAULT_EFFICIENCY,
    *,
    latitude_rad: float,
    et0_model: Et0Model = et0_hargreaves,
) -> IrrigationPlan:
    """Full-season balance from planting with zero initial depletion.

    Weather must cover every season day; a gap raises MissingWeatherError
    naming the first missing date.
    """
    if not (0 < efficiency <= 1):
        raise OutOfRangeError(f"efficiency {efficiency} outside (0, 1]")
    plant = app_input.plant_date
    taw = total_available_water_mm(soil, crop)
    raw = readily_available_water_mm(soil, crop)
    events, trace, _ = _step_days(
        first_day=plant,
        last_day=plant + timedelta(days=crop.season_days - 1),
        plant_date=plant,
        depletion_mm=0.0,
        crop=crop,
        weather_by_date=_weather_index(weather),
        taw=taw,
        raw=raw,
        efficiency=efficiency,
        area_m2=app_input.area_m2,
        flow_lph=app_input.flow_lph,
        latitude_rad=latitude_rad,
        et0_model=et0_model,
    )
    return IrrigationPlan(
        stage_plan=stage_plan(crop, plant),
        events=tuple(events),
        taw_mm=taw,
        raw_mm=raw,
        trace=tuple(trace),
    )


def observed_depletion_mm(sm_percent_vwc: float, soil: SoilProfile, crop: CropProfile) -> float:
    """Depletion implied by a soil-moisture reading, clamped to [0, TAW]."""
    taw = total_available_water_mm(soil, crop)
    d_obs = (soil.fc - sm_percent_vwc / 100.0) * crop.root_depth_m * 1000.0
    return min(taw, max(0.0, d_obs))


def update_with_observation(
    plan: IrrigationPlan,
    sm_percent_vwc: float,
    today: date,
    app_input: ApplicationInput,
    crop: CropProfile,
    soil: SoilProfile,
    weather: Iterable[WeatherDay],
    efficiency: float = DEFAULT_EFFICIENCY,
    *,
    latitude_rad: float,
    et0_model: Et0Model = et0_hargreaves,
) -> IrrigationPlan:
    """Fold a live soil-moisture observation into the plan.

    The observed depletion replaces the modeled end-of-day value for
    `today` (an event fires today if it reaches the trigger), the
    balance is re-run forward from tomorrow, and past events are kept
    unchanged.
    """
    plant = app_input.plant_date
    season_end = plant + timedelta(days=crop.season_days - 1)
    if not (plant <= today <= season_end):
        raise OutOfRangeError(
            f"{today.isoformat()} outside season [{plant.isoformat()}, {season_end.isoformat()}]"
        )
    taw = plan.taw_mm
    raw = plan.raw_mm
    d_obs = observed_depletion_mm(sm_percent_vwc, soil, crop)

    past_events = [e for e in plan.events if e.date < today]
    past_trace = [t for t in plan.trace if t.date < today]

    # Today's end-of-day state is the observation itself.
    depletion = d_obs
    today_irrigation = 0.0
    if d_obs >= raw:
        gross = d_obs / efficiency
        past_events.append(
            IrrigationEvent(
                date=today,
                net_depth_mm=d_obs,
                gross_depth_mm=gross,
                runtime_min=runtime_minutes(gross, app_input.area_m2, app_input.flow_lph),
            )
        )
        today_irrigation = d_obs
        depletion = 0.0
    past_trace.append(
        DayBalance(
            date=today,
            et0_mm=0.0,
            kc=kc_on(crop, (today - plant).days),
            etc_mm=0.0,
            rain_mm=0.0,
            depletion_mm=depletion,
            etc_applied_mm=0.0,
            rain_applied_mm=0.0,
            irrigation_net_mm=today_irrigation,
        )
    )

    future_events: list[IrrigationEvent] = []
    future_trace: list[DayBalance] = []
    if today < season_end:
        future_events, future_trace, _ = _step_days(
            first_day=today + timedelta(days=1),
            last_day=season_end,
            plant_date=plant,
            depletion_mm=depletion,
            crop=crop,
            weather_by_date=_weather_index(weather),
            taw=taw,
            raw=raw,
            efficiency=efficiency,
            area_m2=app_input.area_m2,
            flow_lph=app_input.flow_lph,
            latitude_rad=latitude_rad,
            et0_model=et0_model,
        )
    return IrrigationPlan(
        stage_plan=plan.stage_plan,
        events=tuple(past_events) + tuple(future_events),
        taw_mm=taw,
        raw_mm=raw,
        trace=tuple(past_trace) + tuple(future_trace),
    )
