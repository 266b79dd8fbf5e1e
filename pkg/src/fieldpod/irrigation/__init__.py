"""Irrigation scheduling: crop coefficients, reference evapotranspiration,
daily root-zone water balance, and live soil-moisture replanning."""

from .models import (  # noqa: F401
    CropProfile,
    DayBalance,
    IrrigationEvent,
    IrrigationPlan,
    SoilProfile,
    StagePlan,
    WeatherDay,
)
from .et0 import et0_hargreaves, ra_extraterrestrial  # noqa: F401
from .balance import (  # noqa: F401
    kc_on,
    runtime_minutes,
    simulate_balance,
    stage_plan,
    update_with_observation,
)
