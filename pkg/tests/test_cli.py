"""Command-line interface: run and plan subcommands."""

import time
from datetime import date, timedelta

from fieldpod import cli
from fieldpod.irrigation import simulate_balance
from fieldpod.irrigation.export import events_csv, stages_csv
from fieldpod.mqtt import StubBroker
from fieldpod.runtime import ApplicationInput


def _weather_csv(tmp_path, days, start=date(2021, 3, 1), tmin=15.0, tmax=28.0, rain=0.0):
    lines = ["date,tmin_c,tmax_c,rain_mm"]
    for i in range(days):
        lines.append(f"{(start + timedelta(days=i)).isoformat()},{tmin},{tmax},{rain}")
    path = tmp_path / "weather.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


SCENARIO = """
device:
  config_window_s: 60
  sample_period_s: 30
broker:
  stub: true
"""


class TestRun:
    def test_scenario_run_exits_clean(self, tmp_path, capsys):
        scenario = tmp_path / "s.yaml"
        scenario.write_text(SCENARIO, encoding="utf-8")
        rc = cli.main(
            [
                "run",
                "--scenario",
                str(scenario),
                "--duration",
                "300",
                "--time-scale",
                "600",
                "--data-dir",
                str(tmp_path / "data"),
                "--port",
                "0",
            ]
        )
        assert rc == 0

    def test_telemetry_reaches_external_broker(self, tmp_path):
        broker = StubBroker().start()
        scenario = tmp_path / "s.yaml"
        scenario.write_text("device:\n  config_window_s: 60\n  sample_period_s: 30\n", encoding="utf-8")
        try:
            rc = cli.main(
                [
                    "run",
                    "--scenario",
                    str(scenario),
                    "--broker",
                    broker.address,
                    "--duration",
                    "300",
                    "--time-scale",
                    "600",
                    "--data-dir",
                    str(tmp_path / "data"),
                    "--port",
                    "0",
                ]
            )
            assert rc == 0
            topics = {m.topic for m in broker.published}
            assert {"/usp/temp", "/usp/humid", "/usp/sm"} <= topics
        finally:
            broker.stop()

    def test_missing_scenario_is_usage_error(self, tmp_path):
        rc = cli.main(["run", "--scenario", str(tmp_path / "absent.yaml"), "--port", "0"])
        assert rc == 2

    def test_injected_storage_failure_faults(self, tmp_path):
        scenario = tmp_path / "s.yaml"
        scenario.write_text(
            SCENARIO + "storage:\n  fail_appends_after: 0\n", encoding="utf-8"
        )
        rc = cli.main(
            [
                "run",
                "--scenario",
                str(scenario),
                "--broker",
                "127.0.0.1:1",  # nothing listens: readings go to storage
                "--duration",
                "300",
                "--time-scale",
                "600",
                "--data-dir",
                str(tmp_path / "data"),
                "--port",
                "0",
            ]
        )
        assert rc == 1

    def test_accelerated_run_completes_in_bounded_wall_time(self, tmp_path):
        scenario = tmp_path / "s.yaml"
        scenario.write_text(SCENARIO, encoding="utf-8")
        started = time.monotonic()
        rc = cli.main(
            [
                "run",
                "--scenario",
                str(scenario),
                "--duration",
                "1200",
                "--time-scale",
                "600",
                "--data-dir",
                str(tmp_path / "data"),
                "--port",
                "0",
            ]
        )
        elapsed = time.monotonic() - started
        assert rc == 0
        assert elapsed < 2 * (1200 / 600)


class TestPlan:
    def test_tables_match_engine_export(self, tmp_path, capsys):
        import math

        _weather_csv(tmp_path, 90)
        rc = cli.main(
            [
                "plan",
                "--crop",
                "beans",
                "--soil",
                "loam",
                "--plant-date",
                "2021-03-01",
                "--area",
                "2",
                "--flow",
                "600",
                "--weather",
                str(tmp_path / "weather.csv"),
                "--latitude",
                "18.5",
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0

        from fieldpod.irrigation.database import load_crops, load_soils
        from fieldpod.irrigation.weather import load_weather_csv

        plan = simulate_balance(
            ApplicationInput("beans", "loam", date(2021, 3, 1), 2.0, 600.0),
            load_crops()["beans"],
            load_soils()["loam"],
            load_weather_csv(tmp_path / "weather.csv"),
            latitude_rad=math.radians(18.5),
        )
        assert out == stages_csv(plan) + "\n" + events_csv(plan)
        assert "initial,2021-03-01,20" in out

    def test_byte_identical_across_runs(self, tmp_path, capsys):
        _weather_csv(tmp_path, 90)
        args = [
            "plan", "--crop", "beans", "--soil", "loam", "--plant-date", "2021-03-01",
            "--area", "2", "--flow", "600",
            "--weather", str(tmp_path / "weather.csv"), "--latitude", "18.5",
        ]
        assert cli.main(args) == 0
        first = capsys.readouterr().out
        assert cli.main(args) == 0
        second = capsys.readouterr().out
        assert first == second
        assert first  # nonempty

    def test_zero_demand_weather_yields_empty_event_table(self, tmp_path, capsys):
        _weather_csv(tmp_path, 90, tmin=20.0, tmax=20.0)
        rc = cli.main(
            [
                "plan", "--crop", "beans", "--soil", "loam", "--plant-date", "2021-03-01",
                "--area", "2", "--flow", "600",
                "--weather", str(tmp_path / "weather.csv"), "--latitude", "18.5",
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert out.rstrip().endswith("date,net_depth_mm,gross_depth_mm,runtime_min")

    def test_short_weather_is_usage_error(self, tmp_path, capsys):
        _weather_csv(tmp_path, 30)  # beans season needs 90 days
        rc = cli.main(
            [
                "plan", "--crop", "beans", "--soil", "loam", "--plant-date", "2021-03-01",
                "--area", "2", "--flow", "600",
                "--weather", str(tmp_path / "weather.csv"), "--latitude", "18.5",
            ]
        )
        assert rc == 2
        assert "2021-03-31" in capsys.readouterr().err

    def test_unknown_crop_is_usage_error(self, tmp_path, capsys):
        _weather_csv(tmp_path, 90)
        rc = cli.main(
            [
                "plan", "--crop", "dragonfruit", "--soil", "loam", "--plant-date", "2021-03-01",
                "--area", "2", "--flow", "600",
                "--weather", str(tmp_path / "weather.csv"), "--latitude", "18.5",
            ]
        )
        assert rc == 2
        assert "dragonfruit" in capsys.readouterr().err
