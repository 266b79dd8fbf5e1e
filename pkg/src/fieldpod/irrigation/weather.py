"""Weather history I/O: CSV with header `date,tmin_c,tmax_c,rain_mm`."""

from __future__ import annotations

import csv
from datetime import date
from pathlib import Path

from ..errors import ValidationError
from .models import WeatherDay

WEATHER_HEADER = ["date", "tmin_c", "tmax_c", "rain_mm"]


def load_weather_csv(path: str | Path) -> list[WeatherDay]:
    days = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != WEATHER_HEADER:
            raise ValidationError(
                "weather", f"expected header {','.join(WEATHER_HEADER)}, got {reader.fieldnames}"
            )
        for row in reader:
            try:
                days.append(
                    WeatherDay(
                        date=date.fromisoformat(row["date"]),
                        tmin_c=float(row["tmin_c"]),
                        tmax_c=float(row["tmax_c"]),
                        rain_mm=float(row["rain_mm"]),
                    )
                )
            except ValueError as exc:
                raise ValidationError("weather", f"bad row {row!r}: {exc}") from exc
    return days


def save_weather_csv(path: str | Path, days: list[WeatherDay]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(WEATHER_HEADER)
        for d in days:
            writer.writerow([d.date.isoformat(), d.tmin_c, d.tmax_c, d.rain_mm])
