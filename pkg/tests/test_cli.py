import json
import math
import subprocess
import sys

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from uavplan.cli import main

RUN = [sys.executable, "-m", "uavplan"]


def scenario_data(**overrides):
    data = {
        "version": 1,
        "carrier_hz": 2.4e9,
        "subregions": [
            {"label": "sparse", "area_over_pi_eb": 1.0, "density_per_m2": 0.1,
             "environment": "urban"},
            {"label": "medium", "area_over_pi_eb": 1.0, "density_per_m2": 1.0,
             "environment": "urban"},
            {"label": "dense", "area_over_pi_eb": 1.0, "density_per_m2": 5.0,
             "environment": "urban"},
        ],
        "service": {"rate_su": 1.0, "circuit_power_db": 100.0, "battery_j": 1.0},
        "solver": {"trials": 300, "seed": 42},
    }
    data.update(overrides)
    return data


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_data()))
    return str(path)


def run_cli(*args, check=False):
    proc = subprocess.run(RUN + list(args), capture_output=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr.decode()}")
    return proc


def csv_rows(text):
    lines = [l for l in text.strip().split("\n") if not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


class TestPlanCommand:
    def test_byte_identical_runs(self, scenario_file):
        a = run_cli("plan", scenario_file, check=True)
        b = run_cli("plan", scenario_file, check=True)
        assert a.stdout == b.stdout

    def test_json_radii_ratios(self, scenario_file):
        proc = run_cli("plan", scenario_file, check=True)
        body = json.loads(proc.stdout)
        radii = [s["r_b_star_m"] for s in body["subregions"]]
        assert radii[1] / radii[0] == pytest.approx(10 ** -0.25, rel=1e-9)
        assert radii[2] / radii[0] == pytest.approx(50 ** -0.25, rel=1e-9)
        assert body["calibration"]["status"] in ("CONFIRMED", "DISCREPANT")

    def test_table_format(self, scenario_file):
        proc = run_cli("plan", scenario_file, "--format", "table", check=True)
        text = proc.stdout.decode()
        assert "phi_total" in text
        assert "calibration" in text

    def test_output_file(self, scenario_file, tmp_path):
        out = tmp_path / "plan.json"
        run_cli("plan", scenario_file, "--output", str(out), check=True)
        assert json.loads(out.read_text())["subregions"]

    def test_empty_subregions_exit_2(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text(json.dumps(scenario_data(subregions=[])))
        proc = run_cli("plan", str(path))
        assert proc.returncode == 2
        assert b"subregions" in proc.stderr

    def test_degenerate_density_exit_3(self, tmp_path):
        data = scenario_data()
        data["subregions"][0]["density_per_m2"] = 0.0
        path = tmp_path / "deg.json"
        path.write_text(json.dumps(data))
        proc = run_cli("plan", str(path))
        assert proc.returncode == 3
        assert b"sparse" in proc.stderr

    def test_missing_file_exit_2(self):
        proc = run_cli("plan", "/nonexistent/scenario.json")
        assert proc.returncode == 2


class TestKernelCommand:
    def test_row_count_and_header(self):
        proc = run_cli("kernel", "--env", "urban", "--range", "0:2:0.01", check=True)
        text = proc.stdout.decode()
        assert "\r" not in text and text.endswith("\n")
        header, rows = csv_rows(text)
        assert header == ["h_n", "gamma", "dgamma_dhn"]
        assert len(rows) == 201
        h = [float(r[0]) for r in rows]
        assert h == sorted(h)

    @pytest.mark.parametrize("env", ["suburban", "urban", "dense-urban", "high-rise-urban"])
    def test_derivative_sign_changes_once(self, env):
        proc = run_cli("kernel", "--env", env, "--range", "0:2:0.02", check=True)
        _, rows = csv_rows(proc.stdout.decode())
        signs = [float(r[2]) >= 0 for r in rows]
        flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
        assert flips == 1

    def test_gamma_minimum_near_solver_optimum(self):
        from uavplan.altitude import optimal_normalized_altitude
        from uavplan.channel import preset

        proc = run_cli("kernel", "--env", "urban", "--range", "0:2:0.01", check=True)
        _, rows = csv_rows(proc.stdout.decode())
        gammas = [float(r[1]) for r in rows]
        h_at_min = float(rows[gammas.index(min(gammas))][0])
        sol = optimal_normalized_altitude(preset("urban"))
        assert abs(h_at_min - sol.h_n_star) <= 0.01

    def test_malformed_range_exit_2(self):
        assert run_cli("kernel", "--range", "0:2").returncode == 2
        assert run_cli("kernel", "--range", "0:2:froggy").returncode == 2
        assert run_cli("kernel", "--range", "2:0:0.1").returncode == 2

    def test_unknown_env_exit_2(self):
        assert run_cli("kernel", "--env", "swamp", "--range", "0:1:0.5").returncode == 2


class TestSweepCommand:
    def test_circuit_power_blocks(self, scenario_file, tmp_path):
        out = tmp_path / "sweep.csv"
        run_cli("sweep", scenario_file, "--parameter", "pc_db",
                "--values", "100,110,120", "--radii", "10:100:10",
                "--output", str(out), check=True)
        header, rows = csv_rows(out.read_text())
        assert header == ["param_value", "r_b", "phi"]
        assert len(rows) == 3 * 10
        locus_path = str(out) + ".locus.csv"
        lheader, lrows = csv_rows(open(locus_path).read())
        assert lheader == ["param_value", "r_b_star", "phi_star"]
        r = {float(row[0]): float(row[1]) for row in lrows}
        assert r[110.0] / r[100.0] == pytest.approx(10 ** 0.25, rel=1e-9)
        assert r[120.0] / r[110.0] == pytest.approx(10 ** 0.25, rel=1e-9)

    def test_locus_phi_equals_bound(self, scenario_file, tmp_path):
        from uavplan.altitude import optimal_normalized_altitude
        from uavplan.channel import preset
        from uavplan.placement import Subregion, recall_frequency_lower_bound
        from uavplan.power import ServiceParams

        out = tmp_path / "s.csv"
        run_cli("sweep", scenario_file, "--parameter", "pc_db", "--values", "100",
                "--radii", "10:50:10", "--output", str(out), check=True)
        _, lrows = csv_rows(open(str(out) + ".locus.csv").read())
        phi_star = float(lrows[0][2])
        sol = optimal_normalized_altitude(preset("urban"))
        sub = Subregion(label="sparse", area_m2=math.pi, density=0.1,
                        env=preset("urban"))
        params = ServiceParams(rate_su=1.0, circuit_power=1e10, battery_j=1.0)
        bound = recall_frequency_lower_bound(sub, params, sol)
        assert phi_star == pytest.approx(bound, rel=1e-9)

    def test_single_value_matches_plan(self, scenario_file, tmp_path):
        # cross-command consistency: the locus at the scenario's own circuit
        # power equals the plan's recall frequency for that subregion
        out = tmp_path / "s.csv"
        run_cli("sweep", scenario_file, "--parameter", "pc_db", "--values", "100",
                "--radii", "10:50:10", "--output", str(out), check=True)
        _, lrows = csv_rows(open(str(out) + ".locus.csv").read())
        plan = json.loads(run_cli("plan", scenario_file, check=True).stdout)
        sparse = next(s for s in plan["subregions"] if s["label"] == "sparse")
        assert float(lrows[0][2]) == pytest.approx(sparse["phi_per_s"], rel=1e-11)
        assert float(lrows[0][1]) == pytest.approx(sparse["r_b_star_m"], rel=1e-11)

    def test_density_sweep(self, scenario_file, tmp_path):
        out = tmp_path / "d.csv"
        run_cli("sweep", scenario_file, "--parameter", "density",
                "--values", "0.1,1.0", "--radii", "10:50:20",
                "--output", str(out), check=True)
        _, lrows = csv_rows(open(str(out) + ".locus.csv").read())
        r = {float(row[0]): float(row[1]) for row in lrows}
        assert r[1.0] / r[0.1] == pytest.approx(10 ** -0.25, rel=1e-9)

    def test_unknown_parameter_exit_2(self, scenario_file):
        proc = run_cli("sweep", scenario_file, "--parameter", "altitude",
                       "--values", "1", "--radii", "1:2:1")
        assert proc.returncode == 2

    def test_stdout_includes_locus_block(self, scenario_file):
        proc = run_cli("sweep", scenario_file, "--parameter", "pc_db",
                       "--values", "100", "--radii", "10:30:10", check=True)
        text = proc.stdout.decode()
        assert "param_value,r_b,phi" in text
        assert "param_value,r_b_star,phi_star" in text


class TestContourCommand:
    def min_power_db(self, r_t=20.0):
        from uavplan.altitude import optimal_normalized_altitude
        from uavplan.channel import preset
        from uavplan.power import ServiceParams, scale_factor

        sol = optimal_normalized_altitude(preset("urban"))
        params = ServiceParams(rate_su=1.0, circuit_power=0.0, battery_j=1.0)
        return 10 * math.log10(scale_factor(r_t, 0.1, params) * sol.gamma_at_opt)

    def test_optimal_column_is_linear(self):
        proc = run_cli("contour", "--env", "urban", "--power-db", "100",
                       "--radii", "5:30:5", check=True)
        header, rows = csv_rows(proc.stdout.decode())
        assert header == ["r_b", "h_low", "h_high", "h_opt"]
        slope = [float(r[3]) / float(r[0]) for r in rows]
        assert all(s == pytest.approx(slope[0], rel=1e-9) for s in slope)

    def test_tangency_at_largest_feasible_radius(self):
        power = self.min_power_db(20.0)
        proc = run_cli("contour", "--env", "urban", "--power-db", f"{power!r}",
                       "--radii", "5:20:2.5", check=True)
        _, rows = csv_rows(proc.stdout.decode())
        last = rows[-1]
        assert float(last[0]) == 20.0
        assert float(last[1]) == pytest.approx(float(last[2]), rel=1e-6)
        assert float(last[1]) == pytest.approx(float(last[3]), rel=1e-6)

    def test_infeasible_exit_4(self):
        proc = run_cli("contour", "--env", "urban", "--power-db", "-150",
                       "--radii", "100:200:50")
        assert proc.returncode == 4


class TestSimulateCommand:
    def test_fixed_seed_byte_identical(self, scenario_file):
        a = run_cli("simulate", scenario_file, "--seed", "42", check=True)
        b = run_cli("simulate", scenario_file, "--seed", "42", check=True)
        assert a.stdout == b.stdout

    def test_all_pass_exit_0(self, scenario_file):
        proc = run_cli("simulate", scenario_file, "--trials", "300", "--seed", "42")
        assert proc.returncode == 0
        body = json.loads(proc.stdout)
        assert body["all_within_3_sigma"]

    def test_validation_failure_exit_5(self, tmp_path):
        # two trials leave a wild standard error; seed 0 deterministically
        # lands beyond three sigma for the sparse subregion
        data = scenario_data()
        data["subregions"] = [data["subregions"][0]]
        path = tmp_path / "s.json"
        path.write_text(json.dumps(data))
        proc = run_cli("simulate", str(path), "--trials", "2", "--seed", "0")
        assert proc.returncode == 5
        body = json.loads(proc.stdout)
        assert not body["all_within_3_sigma"]

    def test_zero_trials_exit_2(self, scenario_file):
        assert run_cli("simulate", scenario_file, "--trials", "0").returncode == 2

    def test_negative_seed_exit_2(self, scenario_file):
        proc = run_cli("simulate", scenario_file, "--seed", "-1")
        assert proc.returncode == 2
        assert b"seed" in proc.stderr


class TestLayoutCommand:
    def geometry_file(self, tmp_path, width=400.0):
        data = scenario_data()
        for i, spec in enumerate(data["subregions"]):
            spec["geometry"] = {"x0": 500.0 * i, "y0": 0.0,
                                "width": width, "height": 300.0}
        path = tmp_path / "geo.json"
        path.write_text(json.dumps(data))
        return str(path)

    def test_rows_and_header_notes(self, tmp_path):
        proc = run_cli("layout", self.geometry_file(tmp_path), check=True)
        text = proc.stdout.decode()
        comments = [l for l in text.split("\n") if l.startswith("#")]
        assert len(comments) == 3  # one count note per subregion
        header, rows = csv_rows(text)
        assert header == ["label", "cx", "cy", "r_b", "h"]
        radii = {r[0]: float(r[3]) for r in rows}
        assert radii["dense"] < radii["medium"] < radii["sparse"]

    def test_degenerate_rectangle_zero_rows(self, tmp_path):
        data = scenario_data()
        for i, spec in enumerate(data["subregions"]):
            spec["geometry"] = {"x0": 500.0 * i, "y0": 0.0,
                                "width": 400.0, "height": 300.0}
        data["subregions"][1]["geometry"]["height"] = 0.0
        path = tmp_path / "degrect.json"
        path.write_text(json.dumps(data))
        proc = run_cli("layout", str(path), check=True)
        _, rows = csv_rows(proc.stdout.decode())
        assert all(r[0] != "medium" for r in rows)

    def test_pitch_halves_when_density_16x(self, tmp_path):
        data = scenario_data()
        data["subregions"] = [
            {"label": "base", "area_over_pi_eb": 1.0, "density_per_m2": 0.1,
             "environment": "urban",
             "geometry": {"x0": 0.0, "y0": 0.0, "width": 400.0, "height": 300.0}},
            {"label": "x16", "area_over_pi_eb": 1.0, "density_per_m2": 1.6,
             "environment": "urban",
             "geometry": {"x0": 0.0, "y0": 0.0, "width": 400.0, "height": 300.0}},
        ]
        path = tmp_path / "pitch.json"
        path.write_text(json.dumps(data))
        proc = run_cli("layout", str(path), check=True)
        _, rows = csv_rows(proc.stdout.decode())
        radii = {r[0]: float(r[3]) for r in rows}
        assert radii["base"] / radii["x16"] == pytest.approx(2.0, rel=1e-9)

    def test_missing_geometry_exit_2(self, scenario_file):
        proc = run_cli("layout", scenario_file)
        assert proc.returncode == 2
        assert b"geometry" in proc.stderr


class TestRemoteMode:
    def test_server_flag_routes_over_http(self, scenario_file, monkeypatch):
        from uavplan.api.app import app
        import uavplan.cli as cli_mod

        test_client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            path = url.split("http://svc", 1)[1]
            return test_client.post(path, json=json)

        monkeypatch.setattr(cli_mod.httpx, "post", fake_post)
        runner = CliRunner()
        remote = runner.invoke(main, ["--server", "http://svc", "plan", scenario_file])
        assert remote.exit_code == 0
        local = runner.invoke(main, ["plan", scenario_file])
        assert remote.output == local.output

    def test_remote_solver_error_exit_3(self, tmp_path, monkeypatch):
        from uavplan.api.app import app
        import uavplan.cli as cli_mod

        data = scenario_data()
        data["subregions"][0]["density_per_m2"] = 0.0
        path = tmp_path / "deg.json"
        path.write_text(json.dumps(data))

        test_client = TestClient(app)
        monkeypatch.setattr(
            cli_mod.httpx, "post",
            lambda url, json=None, timeout=None:
                test_client.post(url.split("http://svc", 1)[1], json=json))
        runner = CliRunner()
        result = runner.invoke(main, ["--server", "http://svc", "plan", str(path)])
        assert result.exit_code == 3
