"""Scenario runner and operator tool.

    fieldpod run  --scenario scenario.yaml [--broker HOST:PORT] [--duration S]
                  [--time-scale K] [--config-window S] [--data-dir DIR] [--port N]
    fieldpod plan --crop beans --soil loam --plant-date 2021-03-01 --area 2
                  --flow 600 --weather weather.csv --latitude 18.5

`run` boots the device, serves the portal, and drives the loop for the
requested simulated duration (exit 0 clean, 1 on Fault, 2 on usage
errors).  `plan` prints the growth-stage table and the irrigation event
table for the given inputs, byte-identical across runs.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import threading
from datetime import date
from pathlib import Path
from typing import Optional

from .device import Device
from .errors import FieldPodError, ScenarioError
from .irrigation import balance, database
from .irrigation.export import events_csv, stages_csv
from .irrigation.weather import load_weather_csv
from .mqtt import StubBroker
from .runtime import ApplicationInput
from .scenario import Scenario, load_scenario

log = logging.getLogger(__name__)

USAGE_ERROR = 2


def _add_run_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("run", help="boot the device and run a scenario")
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--broker", default=None, help="broker host:port (overrides the scenario)")
    p.add_argument("--config-window", type=float, default=None, help="config window, seconds")
    p.add_argument("--time-scale", type=float, default=1.0, help="simulation speed-up factor")
    p.add_argument("--duration", type=float, default=None, help="simulated seconds to run")
    p.add_argument("--data-dir", default=None, help="device data directory")
    p.add_argument("--port", type=int, default=8266, help="portal HTTP port (0 = ephemeral)")
    p.add_argument("--ui-dir", default=None, help="static UI asset directory")


def _add_plan_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("plan", help="print the irrigation schedule for given inputs")
    p.add_argument("--crop", required=True)
    p.add_argument("--soil", required=True)
    p.add_argument("--plant-date", required=True, help="ISO date, e.g. 2021-03-01")
    p.add_argument("--area", type=float, required=True, help="irrigated area, m2")
    p.add_argument("--flow", type=float, required=True, help="pump flow, liters/hour")
    p.add_argument("--weather", required=True, help="weather CSV (date,tmin_c,tmax_c,rain_mm)")
    p.add_argument("--latitude", type=float, required=True, help="site latitude, degrees")
    p.add_argument("--efficiency", type=float, default=balance.DEFAULT_EFFICIENCY)
    p.add_argument("--data-dir", default=None, help="directory with crop/soil database overrides")


def _data_dir(value: Optional[str]) -> Path:
    if value:
        return Path(value)
    env = os.environ.get("FIELDPOD_DATA_DIR")
    return Path(env) if env else Path.cwd() / "fieldpod-data"


class _FaultSchedule:
    """Flips the stub broker offline/online at scripted simulated times."""

    def __init__(self, broker: StubBroker, device: Device, spans):
        self.broker = broker
        self.device = device
        self.spans = list(spans)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._drive, name="broker-faults", daemon=True)

    def start(self):
        if self.spans:
            self._thread.start()
        return self

    def stop(self):
        self._stop.set()

    def _wait_until(self, sim_target: float) -> bool:
        while not self._stop.is_set():
            if self.device.clock.sim_elapsed() >= sim_target:
                return True
            self._stop.wait(0.005)
        return False

    def _drive(self):
        for start, end in self.spans:
            if not self._wait_until(start):
                return
            self.broker.go_offline()
            if not self._wait_until(end):
                return
            self.broker.go_online()


def run_scenario(
    scenario: Scenario,
    data_dir: Path,
    broker: Optional[str],
    time_scale: float,
    duration_s: Optional[float],
    config_window_s: Optional[float] = None,
    portal_port: int = 8266,
    ui_dir: Optional[Path] = None,
) -> int:
    """Compose broker (stub if requested), device, and fault schedule."""
    stub: Optional[StubBroker] = None
    if broker is None and scenario.use_stub_broker:
        stub = StubBroker().start()
        broker = stub.address
    device = Device(
        scenario,
        data_dir=data_dir,
        broker_address=broker,
        time_scale=time_scale,
        config_window_s=config_window_s,
        portal_port=portal_port,
        ui_dir=ui_dir,
        stream_horizon_s=duration_s,
    )
    faults = None
    if stub is not None and scenario.broker_faults:
        faults = _FaultSchedule(stub, device, scenario.broker_faults).start()
    try:
        return device.run(duration_s)
    except KeyboardInterrupt:
        device.stop()
        device.shutdown()
        return 0
    finally:
        if faults is not None:
            faults.stop()
        if stub is not None:
            stub.stop()


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, FieldPodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return run_scenario(
            scenario,
            data_dir=_data_dir(args.data_dir),
            broker=args.broker,
            time_scale=args.time_scale,
            duration_s=args.duration,
            config_window_s=args.config_window,
            portal_port=args.port,
            ui_dir=Path(args.ui_dir) if args.ui_dir else None,
        )
    except FieldPodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_plan(args: argparse.Namespace) -> int:
    data_dir = args.data_dir
    try:
        crops = database.load_crops(data_dir)
        soils = database.load_soils(data_dir)
        if args.crop not in crops:
            raise FieldPodError(f"unknown crop {args.crop!r}; options: {', '.join(sorted(crops))}")
        if args.soil not in soils:
            raise FieldPodError(f"unknown soil {args.soil!r}; options: {', '.join(sorted(soils))}")
        app = ApplicationInput(
            crop_name=args.crop,
            soil_name=args.soil,
            plant_date=date.fromisoformat(args.plant_date),
            area_m2=args.area,
            flow_lph=args.flow,
        )
        weather = load_weather_csv(args.weather)
        plan = balance.simulate_balance(
            app,
            crops[args.crop],
            soils[args.soil],
            weather,
            efficiency=args.efficiency,
            latitude_rad=math.radians(args.latitude),
        )
    except (FieldPodError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    sys.stdout.write(stages_csv(plan))
    sys.stdout.write("\n")
    sys.stdout.write(events_csv(plan))
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="fieldpod", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_plan_parser(sub)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_plan(args)


if __name__ == "__main__":
    sys.exit(main())
