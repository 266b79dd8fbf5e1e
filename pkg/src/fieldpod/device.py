"""The device controller: one control loop owning all mutable state.

Composes the lifecycle state machine, sensor stream, store-and-forward
publisher, irrigation planning, pump actuation, and the portal backend.
Portal handlers and the MQTT reader thread never touch state directly:
writes go through a serialized command channel drained by the loop, and
reads see immutable snapshots.
"""

from __future__ import annotations

import logging
import math
import queue
import threading
from datetime import date
from pathlib import Path
from typing import Callable, Optional

from . import actuation, runtime
from .actuation import ActuatorCommand, CommandSource, DecisionPolicy, PumpAction, RelayState
from .backlog import BacklogStore
from .clock import DeviceClock, WallClock
from .errors import (
    FieldPodError,
    ModeViolationError,
    OutOfRangeError,
    StorageError,
    ValidationError,
)
from .irrigation import balance, database, weather as weather_io
from .irrigation.export import events_csv, stages_csv
from .irrigation.models import IrrigationPlan, WeatherDay
from .netconfig import NetworkConfig, SimulatedWifi
from .portal import StreamHub, start_portal
from .publisher import TelemetryPublisher
from .runtime import (
    ApplicationInput,
    DeviceState,
    DeviceStore,
    DisablePortalConfig,
    Phase,
    RunOneTimeSetup,
    RuntimeSettings,
    SampleSensors,
)
from .scenario import Scenario
from .sensing import ScenarioStream, SensorKind, sample, validate
from .telemetry import command_topic

log = logging.getLogger(__name__)

DEFAULT_POLICY = DecisionPolicy(sm_low=20.0, sm_high=35.0)
DEFAULT_STREAM_HORIZON_S = 30 * 86400.0


class _FailingStore(BacklogStore):
    """Fault injection: appends start failing after a scripted count."""

    def __init__(self, data_dir, fail_after: int):
        super().__init__(data_dir)
        self._appends_left = fail_after

    def append(self, record):
        if self._appends_left <= 0:
            raise StorageError("injected storage failure")
        self._appends_left -= 1
        super().append(record)


class _Command:
    def __init__(self, fn: Callable):
        self.fn = fn
        self.done = threading.Event()
        self.result = None
        self.exc: Optional[BaseException] = None


class Device:
    """A stand-alone device instance bound to a data directory."""

    def __init__(
        self,
        scenario: Scenario,
        data_dir: str | Path,
        broker_address: Optional[str] = None,
        time_scale: float = 1.0,
        config_window_s: Optional[float] = None,
        portal_host: str = "127.0.0.1",
        portal_port: int = 8266,
        ui_dir: Optional[Path] = None,
        clock_source=None,
        connect_timeout_s: float = 1.0,
        ack_timeout_s: float = 2.0,
        stream_horizon_s: Optional[float] = None,
    ):
        self.scenario = scenario
        self.data_dir = Path(data_dir)
        self.settings = RuntimeSettings(
            config_window_s=config_window_s
            if config_window_s is not None
            else scenario.config_window_s,
            sample_period_s=scenario.sample_period_s,
            broker_address=broker_address or RuntimeSettings().broker_address,
            topic_prefix=scenario.topic_prefix,
            device_id=scenario.device_id,
            time_scale=time_scale,
        )
        self.settings.validate()
        self.clock = DeviceClock(clock_source or WallClock(), time_scale=time_scale)
        self.store = DeviceStore(self.data_dir)
        self.stream_hub = StreamHub()
        self.effects_log: list[runtime.Effect] = []
        self.state: Optional[DeviceState] = None
        self.relay = RelayState()
        self.exit_code = 0

        if scenario.storage_fail_appends_after is not None:
            self.backlog = _FailingStore(self.data_dir, scenario.storage_fail_appends_after)
        else:
            self.backlog = BacklogStore(self.data_dir)
        self.publisher = TelemetryPublisher(
            broker_address=self.settings.broker_address,
            device_id=self.settings.device_id,
            topic_prefix=self.settings.topic_prefix,
            store=self.backlog,
            on_message=self._on_mqtt_message,
            connect_timeout_s=connect_timeout_s,
            ack_timeout_s=ack_timeout_s,
        )

        self.wifi = SimulatedWifi(list(scenario.networks), store=self.store)
        self.crops = database.load_crops(self.data_dir)
        self.soils = database.load_soils(self.data_dir)
        self.stream = self._build_stream(stream_horizon_s or DEFAULT_STREAM_HORIZON_S)

        self._app_input: Optional[ApplicationInput] = self.store.load_application()
        self.plan: Optional[IrrigationPlan] = None
        self.policy = self._derive_policy()
        self._weather: list[WeatherDay] = (
            weather_io.load_weather_csv(scenario.weather_file) if scenario.weather_file else []
        )
        self._observed_temps: dict[date, tuple[float, float]] = {}
        self._last_replan_date: Optional[date] = None
        self._last_sm: Optional[tuple[float, float]] = None  # (value, monotonic at)

        self._commands: "queue.Queue[_Command]" = queue.Queue()
        self._manual_inbox: "queue.Queue[str]" = queue.Queue()
        self._manual_current: Optional[ActuatorCommand] = None
        self._wake = threading.Event()
        self._stop = threading.Event()
        self._loop_alive = False
        self._portal = None
        self._portal_host = portal_host
        self._portal_port = portal_port
        self._ui_dir = Path(ui_dir) if ui_dir else Path(__file__).parent / "static"

    # -- construction helpers -------------------------------------------------

    def _build_stream(self, horizon_s: float) -> ScenarioStream:
        source = self.scenario.sensors
        if source.mode == "replay":
            return ScenarioStream.from_replay_csv(
                source.replay_file, epoch=self.clock.epoch_utc, device_id=self.settings.device_id
            )
        return ScenarioStream.simulated(
            source.signals,
            seed=source.seed,
            step_s=source.step_s,
            horizon_s=horizon_s,
            epoch=self.clock.epoch_utc,
            device_id=self.settings.device_id,
        )

    def _derive_policy(self) -> DecisionPolicy:
        if self.scenario.sm_low is not None and self.scenario.sm_high is not None:
            return DecisionPolicy(sm_low=self.scenario.sm_low, sm_high=self.scenario.sm_high)
        if self._app_input is not None:
            soil = self.soils.get(self._app_input.soil_name)
            crop = self.crops.get(self._app_input.crop_name)
            if soil is not None and crop is not None:
                return DecisionPolicy.from_profiles(soil, crop)
        return DEFAULT_POLICY

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        """Boot into config mode and open the portal."""
        if self.state is not None:
            return
        self.state = runtime.boot(self.settings, self.clock.monotonic())
        if self.scenario.application is not None and self._app_input is None:
            runtime.commit_application(
                self.state, self.scenario.application, self.crops, self.soils, self.store
            )
            self._app_input = self.scenario.application
            self.policy = self._derive_policy()
        self._portal = start_portal(
            self, host=self._portal_host, port=self._portal_port, ui_dir=self._ui_dir
        )
        self._loop_alive = True

    @property
    def portal_address(self) -> str:
        host, port = self._portal.server_address[:2]
        return f"{host}:{port}"

    def run(self, duration_s: Optional[float] = None) -> int:
        """Drive the loop until `duration_s` simulated seconds elapse (or
        stop() is called); returns 0 on a clean run, 1 on Fault."""
        self.start()
        granularity = max(
            0.001, min(0.02, self.settings.sample_period_s / self.settings.time_scale / 5)
        )
        try:
            while not self._stop.is_set():
                self.step()
                if self.state.phase is Phase.FAULT:
                    self.exit_code = 1
                    break
                if duration_s is not None and self.clock.sim_elapsed() >= duration_s:
                    break
                self._wake.wait(granularity)
                self._wake.clear()
        finally:
            self.shutdown()
        return self.exit_code

    def step(self) -> None:
        """One loop iteration: commands, lifecycle tick, effects, actuation."""
        self._process_commands()
        if self.state.phase is Phase.FAULT:
            return
        now = self.clock.monotonic()
        try:
            self.state, effects = runtime.tick(
                self.state, now, self._app_input is not None, self.settings
            )
            for effect in effects:
                self.effects_log.append(effect)
                self._execute(effect)
            self._actuation_step(now)
        except StorageError as exc:
            log.error("storage failure, entering fault: %s", exc)
            self.state = runtime.fault(self.state, str(exc))
            self.exit_code = 1

    def stop(self) -> None:
        self._stop.set()
        self._wake.set()

    def shutdown(self) -> None:
        self._loop_alive = False
        self._drain_commands_with_error()
        if self._portal is not None:
            self.stream_hub.close()
            self._portal.shutdown()
            self._portal.server_close()
            self._portal = None
        self.publisher.close()
        self.backlog.close()

    # -- command channel --------------------------------------------------------

    def call(self, fn: Callable, timeout: float = 5.0):
        """Run `fn` inside the control loop and return its result."""
        if not self._loop_alive:
            raise FieldPodError("device is not running")
        command = _Command(fn)
        self._commands.put(command)
        self._wake.set()
        if not command.done.wait(timeout):
            raise FieldPodError("device loop unresponsive")
        if command.exc is not None:
            raise command.exc
        return command.result

    def _process_commands(self) -> None:
        while True:
            try:
                command = self._commands.get_nowait()
            except queue.Empty:
                return
            try:
                command.result = command.fn()
            except BaseException as exc:  # noqa: BLE001 - surfaced to the caller
                command.exc = exc
            finally:
                command.done.set()

    def _drain_commands_with_error(self) -> None:
        while True:
            try:
                command = self._commands.get_nowait()
            except queue.Empty:
                return
            command.exc = FieldPodError("device stopped")
            command.done.set()

    # -- effect execution -------------------------------------------------------

    def _execute(self, effect: runtime.Effect) -> None:
        if isinstance(effect, DisablePortalConfig):
            log.info("config window closed")
        elif isinstance(effect, RunOneTimeSetup):
            self._one_time_setup(effect.with_application)
        elif isinstance(effect, SampleSensors):
            self._sample_and_publish(effect.at)

    def _one_time_setup(self, with_application: bool) -> None:
        database.seed_data_dir(self.data_dir)
        self.crops = database.load_crops(self.data_dir)
        self.soils = database.load_soils(self.data_dir)
        self._app_input = self.store.load_application() or self._app_input
        self.policy = self._derive_policy()
        if with_application and self._app_input and self._weather and self.scenario.latitude_deg is not None:
            try:
                self.plan = self._compute_plan()
                self._export_plan()
            except FieldPodError as exc:
                log.warning("irrigation planning skipped: %s", exc)
        self.publisher.ensure_connected()
        self.publisher.publish_status(self.relay.pump_on)

    def _compute_plan(self) -> IrrigationPlan:
        app = self._app_input
        return balance.simulate_balance(
            app,
            self.crops[app.crop_name],
            self.soils[app.soil_name],
            self._effective_weather(),
            latitude_rad=math.radians(self.scenario.latitude_deg),
        )

    def _export_plan(self) -> None:
        if self.plan is None:
            return
        (self.data_dir / "plan_stages.csv").write_text(stages_csv(self.plan), encoding="utf-8")
        (self.data_dir / "plan_events.csv").write_text(events_csv(self.plan), encoding="utf-8")

    def _effective_weather(self) -> list[WeatherDay]:
        """Weather history with observed daily temperature extremes folded in."""
        if not self._observed_temps:
            return self._weather
        merged = []
        for day in self._weather:
            observed = self._observed_temps.get(day.date)
            if observed:
                merged.append(
                    WeatherDay(
                        date=day.date,
                        tmin_c=observed[0],
                        tmax_c=observed[1],
                        rain_mm=day.rain_mm,
                    )
                )
            else:
                merged.append(day)
        return merged

    def _sample_and_publish(self, at: float) -> None:
        sim_time = self.clock.sim_elapsed(at)
        utc = self.clock.utc_at(at)
        for reading in sample(self.stream, sim_time):
            try:
                validate(reading)
            except OutOfRangeError as exc:
                log.warning("dropping reading: %s", exc)
                continue
            record = self.publisher.submit(reading)  # StorageError propagates
            self.stream_hub.publish(
                {
                    "topic": record.topic,
                    "payload": record.payload.decode("ascii"),
                    "ts": record.timestamp.isoformat(),
                }
            )
            if reading.kind is SensorKind.SOIL_MOISTURE:
                self._last_sm = (reading.value, at)
                self._maybe_replan(reading.value, utc.date())
            elif reading.kind is SensorKind.TEMPERATURE:
                lo_hi = self._observed_temps.get(utc.date())
                value = reading.value
                self._observed_temps[utc.date()] = (
                    (value, value)
                    if lo_hi is None
                    else (min(lo_hi[0], value), max(lo_hi[1], value))
                )

    def _maybe_replan(self, sm_value: float, today: date) -> None:
        """Fold a soil-moisture observation into the plan, once per sim-day."""
        if self.plan is None or self._app_input is None:
            return
        if self._last_replan_date == today:
            return
        app = self._app_input
        try:
            self.plan = balance.update_with_observation(
                self.plan,
                sm_value,
                today,
                app,
                self.crops[app.crop_name],
                self.soils[app.soil_name],
                self._effective_weather(),
                latitude_rad=math.radians(self.scenario.latitude_deg),
            )
            self._last_replan_date = today
        except (OutOfRangeError, FieldPodError) as exc:
            log.debug("replan skipped for %s: %s", today, exc)

    # -- actuation ---------------------------------------------------------------

    def _actuation_step(self, now: float) -> None:
        if self.state.phase is not Phase.OPERATIONAL:
            return
        utc = self.clock.utc_at(now)
        self._ingest_manual_commands(utc)

        period_wall = self.settings.sample_period_s / self.settings.time_scale
        stale = (
            self._last_sm is None
            or (now - self._last_sm[1]) > actuation.STALE_SAMPLE_LIMIT * period_wall
        )
        if stale:
            auto = ActuatorCommand(
                action=PumpAction.OFF, source=CommandSource.AUTO, timestamp=utc
            )
        else:
            auto = actuation.decide(self.policy, self._last_sm[0], self.relay, utc)

        manual = self._manual_current
        if manual is not None and actuation.expired(manual, utc):
            self._manual_current = manual = None
        merged = actuation.merge(auto, manual, utc)
        if merged is None:
            return
        new_relay = actuation.apply(self.relay, merged, utc)
        if new_relay is not self.relay:
            self.relay = new_relay
            self.publisher.publish_status(new_relay.pump_on)
            self.stream_hub.publish(
                {
                    "topic": f"{self.settings.topic_prefix}/status/pump",
                    "payload": "on" if new_relay.pump_on else "off",
                    "ts": utc.isoformat(),
                }
            )

    def _ingest_manual_commands(self, utc) -> None:
        while True:
            try:
                action = self._manual_inbox.get_nowait()
            except queue.Empty:
                return
            if action not in ("on", "off"):
                log.warning("ignoring malformed pump command %r", action)
                continue
            self._manual_current = ActuatorCommand(
                action=PumpAction.ON if action == "on" else PumpAction.OFF,
                source=CommandSource.MANUAL,
                timestamp=utc,
                ttl_s=self.scenario.manual_ttl_s,
            )

    def _on_mqtt_message(self, topic: str, payload: bytes) -> None:
        if topic == command_topic(self.settings.topic_prefix):
            self._manual_inbox.put(payload.decode("ascii", "replace").strip().lower())
            self._wake.set()

    # -- portal backend -----------------------------------------------------------

    def state_view(self) -> dict:
        state = self.state
        now = self.clock.monotonic()
        countdown = 0.0
        if state.phase is Phase.CONFIG_MODE and state.deadline is not None:
            countdown = max(0.0, (state.deadline - now) * self.settings.time_scale)
        app = self._app_input
        return {
            "device_id": self.settings.device_id,
            "phase": state.phase.value,
            "countdown_s": round(countdown, 3),
            "time_scale": self.settings.time_scale,
            "sample_period_s": self.settings.sample_period_s,
            "sim_elapsed_s": round(self.clock.sim_elapsed(now), 3),
            "application": None
            if app is None
            else {
                "crop": app.crop_name,
                "soil": app.soil_name,
                "plant_date": app.plant_date.isoformat(),
                "area_m2": app.area_m2,
                "flow_lph": app.flow_lph,
            },
            "pump": {
                "on": self.relay.pump_on,
                "since": self.relay.since.isoformat() if self.relay.since else None,
            },
            "broker_connected": self.publisher.connected,
            "fault_reason": state.fault_reason,
        }

    def list_networks(self) -> list[dict]:
        return [self._network_dict(n) for n in self.wifi.list_networks()]

    @staticmethod
    def _network_dict(info) -> dict:
        return {
            "ssid": info.ssid,
            "rssi_dbm": info.rssi_dbm,
            "security": info.security.value,
            "connected": info.connected,
        }

    def network_info(self) -> dict:
        connected = self.wifi.connected()
        return {
            "connected": self._network_dict(connected) if connected else None,
            "networks": self.list_networks(),
        }

    def apply_network(self, ssid: str, passphrase: str) -> dict:
        def inside():
            if self.state.phase is not Phase.CONFIG_MODE:
                raise ModeViolationError("network configuration only accepted in config mode")
            return self.wifi.apply(NetworkConfig(ssid=ssid, passphrase=passphrase))

        return self._network_dict(self.call(inside))

    def application_options(self) -> dict:
        return {"crops": sorted(self.crops), "soils": sorted(self.soils)}

    def submit_application(self, body: dict) -> None:
        try:
            app = ApplicationInput(
                crop_name=str(body["crop"]),
                soil_name=str(body["soil"]),
                plant_date=date.fromisoformat(str(body["plant_date"])),
                area_m2=float(body["area_m2"]),
                flow_lph=float(body["flow_lph"]),
            )
        except KeyError as exc:
            raise ValidationError(str(exc.args[0]), "field is required") from exc
        except (TypeError, ValueError) as exc:
            raise ValidationError("application", f"bad value: {exc}") from exc

        def inside():
            runtime.commit_application(self.state, app, self.crops, self.soils, self.store)
            self._app_input = app
            self.policy = self._derive_policy()

        self.call(inside)

    def pump_command(self, action: str) -> None:
        def inside():
            if self.state.phase is not Phase.OPERATIONAL:
                raise ModeViolationError("pump control only available while operational")
            self._manual_inbox.put(action)

        self.call(inside)
