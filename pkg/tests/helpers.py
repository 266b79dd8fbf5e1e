"""Shared fixtures: random scheduler instances and tiny builders."""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, timedelta

from fieldpod.irrigation import CropProfile, SoilProfile, WeatherDay
from fieldpod.runtime import ApplicationInput


@dataclass
class SchedulerInstance:
    app: ApplicationInput
    crop: CropProfile
    soil: SoilProfile
    weather: list[WeatherDay]
    efficiency: float
    latitude_rad: float


def random_instance(rng: random.Random) -> SchedulerInstance:
    """Random crop/soil/weather instance with a season of at most 120 days."""
    stage_len = tuple(rng.randint(1, 30) for _ in range(4))
    crop = CropProfile(
        name="random",
        stage_len=stage_len,
        kc_ini=rng.uniform(0.2, 1.3),
        kc_mid=rng.uniform(0.2, 1.3),
        kc_end=rng.uniform(0.2, 1.3),
        root_depth_m=rng.uniform(0.2, 1.2),
        depletion_fraction_p=rng.uniform(0.2, 0.7),
    )
    wp = rng.uniform(0.02, 0.25)
    soil = SoilProfile(name="random", fc=wp + rng.uniform(0.03, 0.25), wp=wp)
    plant = date(2021, 1, 1) + timedelta(days=rng.randint(0, 200))
    weather = []
    for i in range(crop.season_days):
        tmin = rng.uniform(-5.0, 25.0)
        rain = 0.0 if rng.random() < 0.6 else rng.uniform(0.0, 20.0)
        weather.append(
            WeatherDay(
                date=plant + timedelta(days=i),
                tmin_c=tmin,
                tmax_c=tmin + rng.uniform(0.0, 15.0),
                rain_mm=rain,
            )
        )
    app = ApplicationInput(
        crop_name=crop.name,
        soil_name=soil.name,
        plant_date=plant,
        area_m2=rng.uniform(0.5, 50.0),
        flow_lph=rng.uniform(100.0, 2000.0),
    )
    return SchedulerInstance(
        app=app,
        crop=crop,
        soil=soil,
        weather=weather,
        efficiency=rng.uniform(0.5, 1.0),
        latitude_rad=rng.uniform(-1.1, 1.1),
    )


def flat_weather(plant: date, days: int, tmin: float = 20.0, tmax: float = 20.0) -> list[WeatherDay]:
    """Zero-demand weather when tmin == tmax (no temperature range)."""
    return [
        WeatherDay(date=plant + timedelta(days=i), tmin_c=tmin, tmax_c=tmax, rain_mm=0.0)
        for i in range(days)
    ]
