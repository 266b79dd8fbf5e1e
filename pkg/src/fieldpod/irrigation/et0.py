"""Reference evapotranspiration from temperature records.

Hargreaves-Samani is used because it needs only what this device can
sense (daily min/max temperature) plus solar geometry.  The model is a
seam: anything with the same (WeatherDay, latitude) -> mm/day signature
can replace it in the balance simulation.
"""

from __future__ import annotations

import math

from ..errors import ValidationError
from .models import WeatherDay

# Latitudes beyond this see polar day/night where the sunset hour angle
# is undefined.
MAX_LATITUDE_RAD = math.radians(66.5)

_SOLAR_CONSTANT = 0.0820  # MJ m-2 min-1


def solar_declination(day_of_year: int) -> float:
    """Solar declination in radians for a 1..366 day number."""
    return 0.409 * math.sin(2 * math.pi * day_of_year / 365 - 1.39)


def inverse_distance_factor(day_of_year: int) -> float:
    """Correction for the varying earth-sun distance (dimensionless)."""
    return 1 + 0.033 * math.cos(2 * math.pi * day_of_year / 365)


def sunset_hour_angle(latitude_rad: float, declination_rad: float) -> float:
    return math.acos(-math.tan(latitude_rad) * math.tan(declination_rad))


def ra_from_components(distance_factor: float, latitude_rad: float, declination_rad: float) -> float:
    """Daily extraterrestrial radiation, MJ m-2 day-1, from its parts.

    Even under (latitude, declination) -> (-latitude, -declination): the
    sunset hour angle and both product terms are unchanged, so the two
    hemispheres mirror exactly.
    """
    ws = sunset_hour_angle(latitude_rad, declination_rad)
    return (
        (24 * 60 / math.pi)
        * _SOLAR_CONSTANT
        * distance_factor
        * (
            ws * math.sin(latitude_rad) * math.sin(declination_rad)
            + math.cos(latitude_rad) * math.cos(declination_rad) * math.sin(ws)
        )
    )


def ra_extraterrestrial(latitude_rad: float, day_of_year: int) -> float:
    """Daily extraterrestrial radiation, MJ m-2 day-1.

    Raises for polar latitudes (|lat| >= 66.5 deg) and day numbers
    outside 1..366.
    """
    if abs(latitude_rad) >= MAX_LATITUDE_RAD:
        raise ValidationError(
            "latitude", f"{latitude_rad} rad is polar; need |latitude| < 66.5 deg"
        )
    if not (1 <= day_of_year <= 366):
        raise ValidationError("day_of_year", f"{day_of_year} outside 1..366")
    return ra_from_components(
        inverse_distance_factor(day_of_year),
        latitude_rad,
        solar_declination(day_of_year),
    )


def et0_hargreaves(day: WeatherDay, latitude_rad: float) -> float:
    """Hargreaves-Samani reference evapotranspiration, mm/day, clamped at 0.

    ET0 = 0.0023 * (Tmean + 17.8) * sqrt(Tmax - Tmin) * 0.408 * Ra
    where 0.408 converts Ra from MJ m-2 day-1 to mm/day equivalent.
    """
    t_mean = (day.tmax_c + day.tmin_c) / 2.0
    ra = ra_extraterrestrial(latitude_rad, day.date.timetuple().tm_yday)
    et0 = 0.0023 * (t_mean + 17.8) * math.sqrt(day.tmax_c - day.tmin_c) * (0.408 * ra)
    return max(0.0, et0)
