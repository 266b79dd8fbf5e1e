"""Plan export: the stage table and the dated irrigation-event table.

Output is plain CSV text with fixed float formatting so identical
inputs always serialize byte-identically.
"""

from __future__ import annotations

from .models import IrrigationPlan

EVENTS_HEADER = "date,net_depth_mm,gross_depth_mm,runtime_min"
STAGES_HEADER = "stage,start_date,length_days"


def events_csv(plan: IrrigationPlan) -> str:
    lines = [EVENTS_HEADER]
    for e in plan.events:
        lines.append(
            f"{e.date.isoformat()},{e.net_depth_mm:.3f},{e.gross_depth_mm:.3f},{e.runtime_min:.2f}"
        )
    return "\n".join(lines) + "\n"


def stages_csv(plan: IrrigationPlan) -> str:
    lines = [STAGES_HEADER]
    for s in plan.stage_plan.stages:
        lines.append(f"{s.name},{s.start.isoformat()},{s.length_days}")
    return "\n".join(lines) + "\n"
