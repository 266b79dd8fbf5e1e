"""Full-device integration: portal API, lifecycle, actuation, telemetry."""

import json
import threading
import time

import httpx

from fieldpod.device import Device
from fieldpod.mqtt import StubBroker
from fieldpod.netconfig import NetworkInfo, Security
from fieldpod.scenario import Scenario, SensorSource
from fieldpod.sensing import SensorKind, SignalSpec

SCAN = (
    NetworkInfo(ssid="CoffeeShop", rssi_dbm=-71, security=Security.OPEN),
    NetworkInfo(ssid="HomeLAN", rssi_dbm=-48, security=Security.WPA2),
)


def make_scenario(**overrides) -> Scenario:
    fields = dict(
        device_id="fieldpod-test",
        topic_prefix="/usp",
        config_window_s=120.0,
        sample_period_s=60.0,
        sensors=SensorSource(
            mode="simulated",
            seed=7,
            step_s=60.0,
            signals={
                SensorKind.TEMPERATURE: SignalSpec(baseline=24.0),
                SensorKind.HUMIDITY: SignalSpec(baseline=60.0),
                SensorKind.SOIL_MOISTURE: SignalSpec(baseline=30.0),
            },
        ),
        networks=SCAN,
        sm_low=20.0,
        sm_high=35.0,
    )
    fields.update(overrides)
    return Scenario(**fields)


class RunningDevice:
    """Device driven on a background thread, with an HTTP client bound
    to its portal."""

    def __init__(self, tmp_path, scenario, duration_s=None, time_scale=600.0, **kwargs):
        self.broker = StubBroker().start()
        self.device = Device(
            scenario,
            data_dir=tmp_path,
            broker_address=self.broker.address,
            time_scale=time_scale,
            portal_port=0,
            connect_timeout_s=0.3,
            ack_timeout_s=0.5,
            **kwargs,
        )
        self.duration_s = duration_s
        self.thread = threading.Thread(target=self._run, daemon=True)
        self.exit_code = None

    def _run(self):
        self.exit_code = self.device.run(self.duration_s)

    def __enter__(self):
        self.device.start()
        self.thread.start()
        host, port = self.device._portal.server_address[:2]
        self.client = httpx.Client(base_url=f"http://{host}:{port}", timeout=5.0)
        return self

    def __exit__(self, *exc):
        self.device.stop()
        self.thread.join(timeout=10)
        self.client.close()
        self.broker.stop()

    def wait_phase(self, phase: str, timeout: float = 10.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.client.get("/api/state").json()["phase"] == phase:
                return
            time.sleep(0.01)
        raise AssertionError(f"phase {phase} not reached")

    def wait_pump(self, on: bool, timeout: float = 5.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.client.get("/api/state").json()["pump"]["on"] is on:
                return
            time.sleep(0.01)
        raise AssertionError(f"pump did not turn {'on' if on else 'off'}")


APP_BODY = {
    "crop": "beans",
    "soil": "loam",
    "plant_date": "2021-03-01",
    "area_m2": 2,
    "flow_lph": 600,
}


class TestPortalPhaseGating:
    def test_application_accepted_then_window_closes(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=300.0)) as rig:
            r = rig.client.post("/api/application", json=APP_BODY)
            assert r.status_code == 200
            # Committed input lands in the device data file verbatim.
            stored = json.loads((tmp_path / "device.json").read_text())
            assert stored["crop"] == "beans" and stored["soil"] == "loam"
            assert stored["plant_date"] == "2021-03-01"

            rig.wait_phase("operational")
            r = rig.client.post("/api/application", json=APP_BODY)
            assert r.status_code == 403
            assert r.json()["error"] == "config-window-closed"

    def test_reads_allowed_in_every_phase(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=60.0)) as rig:
            for path in ("/api/networks", "/api/network/info", "/api/application/options", "/api/state"):
                assert rig.client.get(path).status_code == 200
            rig.wait_phase("operational")
            for path in ("/api/networks", "/api/network/info", "/api/application/options", "/api/state"):
                assert rig.client.get(path).status_code == 200

    def test_unknown_crop_rejected_with_field(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=300.0)) as rig:
            r = rig.client.post("/api/application", json=dict(APP_BODY, crop="dragonfruit"))
            assert r.status_code == 400
            assert "crop" in r.json()["detail"]

    def test_options_mirror_database(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario()) as rig:
            body = rig.client.get("/api/application/options").json()
            assert "beans" in body["crops"]
            assert {"sand", "loam", "clay"} <= set(body["soils"])

    def test_reads_idempotent_without_writes(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=600.0)) as rig:
            for path in ("/api/network/info", "/api/application/options", "/api/networks"):
                first = rig.client.get(path).content
                second = rig.client.get(path).content
                assert first == second


class TestPortalNetwork:
    def test_scan_join_info_round_trip(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=300.0)) as rig:
            networks = rig.client.get("/api/networks").json()["networks"]
            assert [n["ssid"] for n in networks] == ["HomeLAN", "CoffeeShop"]

            r = rig.client.post(
                "/api/network", json={"ssid": "HomeLAN", "passphrase": "hunter2hunter2"}
            )
            assert r.status_code == 200
            assert r.json()["connected"] is True
            assert "passphrase" not in r.text

            info = rig.client.get("/api/network/info").json()
            assert info["connected"]["ssid"] == "HomeLAN"
            assert "passphrase" not in json.dumps(info)

    def test_short_wpa2_passphrase_rejected(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=300.0)) as rig:
            r = rig.client.post("/api/network", json={"ssid": "HomeLAN", "passphrase": "abc"})
            assert r.status_code == 400

    def test_unknown_ssid_404(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=300.0)) as rig:
            r = rig.client.post("/api/network", json={"ssid": "Ghost", "passphrase": "12345678"})
            assert r.status_code == 404

    def test_join_rejected_after_window(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=60.0)) as rig:
            rig.wait_phase("operational")
            r = rig.client.post(
                "/api/network", json={"ssid": "HomeLAN", "passphrase": "hunter2hunter2"}
            )
            assert r.status_code == 403


class TestLifecycleAndTelemetry:
    def test_readings_reach_broker_topics(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=30.0)) as rig:
            rig.wait_phase("operational")
            assert rig.broker.wait_for_published(6, timeout=10)
            topics = {m.topic for m in rig.broker.published if not m.topic.endswith("status/pump")}
            assert topics == {"/usp/temp", "/usp/humid", "/usp/sm"}

    def test_state_countdown_reports_nominal_seconds(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=1200.0)) as rig:
            state = rig.client.get("/api/state").json()
            assert state["phase"] == "config"
            assert 0 < state["countdown_s"] <= 1200
            assert state["time_scale"] == 600.0

    def test_persisted_application_prefills_on_reboot(self, tmp_path):
        scenario = make_scenario(config_window_s=300.0)
        with RunningDevice(tmp_path, scenario) as rig:
            assert rig.client.post("/api/application", json=APP_BODY).status_code == 200
        with RunningDevice(tmp_path, scenario) as rig:
            state = rig.client.get("/api/state").json()
            assert state["phase"] == "config"  # reboot reopens the window
            assert state["application"]["crop"] == "beans"

    def test_storage_fault_exits_nonzero(self, tmp_path):
        scenario = make_scenario(config_window_s=30.0, storage_fail_appends_after=0)
        with RunningDevice(tmp_path, scenario) as rig:
            rig.broker.go_offline()  # force the backlog path, which fails
            rig.wait_phase("operational")
            deadline = time.monotonic() + 10
            while rig.exit_code is None and time.monotonic() < deadline:
                time.sleep(0.02)
        assert rig.exit_code == 1

    def test_event_stream_relays_topic_updates(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=30.0)) as rig:
            rig.wait_phase("operational")
            events = []
            with rig.client.stream("GET", "/api/stream") as response:
                for line in response.iter_lines():
                    if line.startswith("data: "):
                        events.append(json.loads(line[6:]))
                        if len(events) >= 3:
                            break
            topics = {e["topic"] for e in events}
            assert topics <= {"/usp/temp", "/usp/humid", "/usp/sm", "/usp/status/pump"}
            assert all("payload" in e and "ts" in e for e in events)


class TestPumpControl:
    def test_pump_rejected_outside_operational(self, tmp_path):
        with RunningDevice(tmp_path, make_scenario(config_window_s=600.0)) as rig:
            r = rig.client.post("/api/pump", json={"action": "on"})
            assert r.status_code == 403

    def test_manual_toggle_and_status_topic(self, tmp_path):
        scenario = make_scenario(config_window_s=30.0, manual_ttl_s=100000.0)
        with RunningDevice(tmp_path, scenario) as rig:
            rig.wait_phase("operational")
            assert rig.client.post("/api/pump", json={"action": "on"}).status_code == 200
            rig.wait_pump(True)
            deadline = time.monotonic() + 5
            while time.monotonic() < deadline:
                if rig.broker.retained.get("/usp/status/pump") == b"on":
                    break
                time.sleep(0.02)
            assert rig.broker.retained.get("/usp/status/pump") == b"on"
            assert rig.client.post("/api/pump", json={"action": "off"}).status_code == 200
            rig.wait_pump(False)

    def test_manual_command_via_mqtt_topic(self, tmp_path):
        from fieldpod.mqtt.client import MqttClient

        scenario = make_scenario(config_window_s=30.0, manual_ttl_s=100000.0)
        with RunningDevice(tmp_path, scenario) as rig:
            rig.wait_phase("operational")
            assert rig.broker.wait_for_published(3, timeout=10)  # device session is up
            remote = MqttClient(rig.broker.address, client_id="phone")
            remote.connect()
            remote.publish("/usp/cmd/pump", b"on", qos=1)
            rig.wait_pump(True)
            remote.close()

    def test_manual_off_suppresses_auto_on_until_ttl(self, tmp_path):
        # Soil moisture stuck below sm_low: the auto rule wants the pump
        # on, but a fresh manual off wins until it expires.
        scenario = make_scenario(
            config_window_s=30.0,
            manual_ttl_s=180.0,  # 0.3 s wall at scale 600
            sensors=SensorSource(
                mode="simulated",
                seed=7,
                step_s=60.0,
                signals={SensorKind.SOIL_MOISTURE: SignalSpec(baseline=10.0)},
            ),
        )
        with RunningDevice(tmp_path, scenario) as rig:
            rig.wait_phase("operational")
            rig.wait_pump(True)  # auto turned it on
            assert rig.client.post("/api/pump", json={"action": "off"}).status_code == 200
            rig.wait_pump(False)
            # TTL expires; the standing auto decision takes over again.
            rig.wait_pump(True, timeout=5.0)

    def test_stale_sensor_guard_forces_off(self, tmp_path):
        # No soil-moisture signal at all: after three missed periods the
        # fail-safe must cut a manually started pump once the ttl lapses.
        scenario = make_scenario(
            config_window_s=30.0,
            manual_ttl_s=240.0,  # 0.4 s wall at scale 600
            sensors=SensorSource(
                mode="simulated",
                seed=7,
                step_s=60.0,
                signals={
                    SensorKind.TEMPERATURE: SignalSpec(baseline=24.0),
                    SensorKind.HUMIDITY: SignalSpec(baseline=60.0),
                },
            ),
        )
        with RunningDevice(tmp_path, scenario) as rig:
            rig.wait_phase("operational")
            assert rig.client.post("/api/pump", json={"action": "on"}).status_code == 200
            rig.wait_pump(True)
            rig.wait_pump(False, timeout=5.0)
            state = rig.client.get("/api/state").json()
            assert state["pump"]["on"] is False
