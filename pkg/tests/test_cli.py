import json
import subprocess
import sys

import pytest

from headbalance.cli import main
from headbalance.profiles import load_profile, save_profile
from conftest import make_profile


def run_cli(*argv):
    return main(list(argv))


def write_profile(tmp_path, rows, name="profile.json"):
    path = tmp_path / name
    save_profile(make_profile(rows), path)
    return path


def write_model(tmp_path, **coeffs):
    values = {"c0": 0.0, "c1": 0.0, "c2": 1.0, "c3": 0.0,
              "comm_alpha": 0.0, "comm_beta": 0.0, "bytes_per_activation": 1.0}
    values.update(coeffs)
    path = tmp_path / "model.json"
    path.write_text(json.dumps(values))
    return path


class TestGenProfile:
    def test_uniform_rows(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        code = run_cli("gen-profile", "--layers", "2", "--heads", "8",
                       "--dist", "uniform", "--budget", "8", "--seed", "1",
                       "--out", str(out))
        assert code == 0
        profile = load_profile(out)
        assert profile.weights == ((1.0,) * 8, (1.0,) * 8)
        assert (tmp_path / "p.json.manifest.json").exists()

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["gen-profile", "--layers", "2", "--heads", "4",
                "--dist", "zipf:1.2", "--budget", "100", "--seed", "7"]
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_zero_zipf_parameter_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("gen-profile", "--layers", "1", "--heads", "4",
                    "--dist", "zipf:0", "--budget", "8", "--seed", "1",
                    "--out", str(tmp_path / "p.json"))
        assert err.value.code == 2

    def test_seed_required(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("gen-profile", "--layers", "1", "--heads", "4",
                    "--dist", "uniform", "--budget", "8",
                    "--out", str(tmp_path / "p.json"))
        assert err.value.code == 2


class TestOptimize:
    def test_static_search(self, tmp_path, capsys):
        profile = write_profile(tmp_path, [[4, 1, 1, 2]])
        out = tmp_path / "plan.json"
        code = run_cli("optimize", "--profile", str(profile), "--tp", "2",
                       "--ch", "0", "--out", str(out))
        assert code == 0
        plan = json.loads(out.read_text())
        assert [layer["delta"] for layer in plan["layers"]] == [2.0]
        assert "delta" in capsys.readouterr().out

    def test_replicated_search(self, tmp_path):
        profile = write_profile(tmp_path, [[4, 1, 1, 2]])
        out = tmp_path / "plan.json"
        code = run_cli("optimize", "--profile", str(profile), "--tp", "2",
                       "--ch", "2", "--rmax", "2", "--out", str(out))
        assert code == 0
        plan = json.loads(out.read_text())
        assert [layer["delta"] for layer in plan["layers"]] == [0.0]

    def test_infeasible_exits_one(self, tmp_path, capsys):
        profile = write_profile(tmp_path, [[4, 1, 1, 2]])
        code = run_cli("optimize", "--profile", str(profile), "--tp", "3",
                       "--ch", "0", "--out", str(tmp_path / "plan.json"))
        assert code == 1
        assert "layer 0" in capsys.readouterr().err

    def test_missing_profile_exits_one(self, tmp_path, capsys):
        code = run_cli("optimize", "--profile", str(tmp_path / "nope.json"),
                       "--tp", "2", "--ch", "0",
                       "--out", str(tmp_path / "plan.json"))
        assert code == 1


class TestCalibrate:
    def test_fit_and_print(self, tmp_path, capsys):
        samples = tmp_path / "samples.csv"
        lines = ["batch,kv_load,latency"]
        for b in (1, 2, 4, 8):
            for c in (0.0, 32.0, 128.0):
                lines.append(f"{b},{c},{1.0 + 0.5*b + 0.01*c + 0.001*b*c}")
        samples.write_text("\n".join(lines) + "\n")
        out = tmp_path / "model.json"
        code = run_cli("calibrate", "--samples", str(samples), "--out", str(out))
        assert code == 0
        model = json.loads(out.read_text())
        assert model["c1"] == pytest.approx(0.5, abs=1e-6)
        assert "residual_rms" in capsys.readouterr().out

    def test_rank_deficiency_exits_one(self, tmp_path, capsys):
        samples = tmp_path / "samples.csv"
        rows = "\n".join(f"{b},{float(b)},{1.0 + b}" for b in (1, 2, 3, 4, 5))
        samples.write_text("batch,kv_load,latency\n" + rows + "\n")
        code = run_cli("calibrate", "--samples", str(samples),
                       "--out", str(tmp_path / "model.json"))
        assert code == 1


class TestCompare:
    def test_report_and_tables(self, tmp_path, capsys):
        profile = write_profile(tmp_path, [[4, 1, 1, 2]])
        model = write_model(tmp_path)
        out = tmp_path / "report.json"
        table = tmp_path / "gpus.csv"
        code = run_cli("compare", "--profile", str(profile), "--tp", "2",
                       "--ch", "2", "--rmax", "2", "--model", str(model),
                       "--batch", "4", "--steps", "3", "--out", str(out),
                       "--gpu-table", str(table))
        assert code == 0
        report = json.loads(out.read_text())
        names = [row["name"] for row in report["strategies"]]
        assert names == ["sha", "nodp", "dp"]
        gains = {row["name"]: row["throughput_gain"] for row in report["strategies"]}
        assert gains["dp"] == pytest.approx(1.25, abs=1e-9)
        table_lines = table.read_text().splitlines()
        assert table_lines[0] == "strategy,gpu,compute_time,busy_rate"
        assert len(table_lines) == 1 + 3 * 2
        stdout = capsys.readouterr().out
        assert "strategy" in stdout and "gain" in stdout

    def test_byte_identical_reports(self, tmp_path):
        profile = write_profile(tmp_path, [[4, 1, 1, 2], [2, 5, 3, 2]])
        model = write_model(tmp_path, c0=1e-4, c3=1e-6)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["compare", "--profile", str(profile), "--tp", "2", "--ch", "2",
                "--rmax", "2", "--model", str(model), "--batch", "4",
                "--steps", "3"]
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (
            (tmp_path / "a.json.manifest.json").read_bytes()
            == (tmp_path / "b.json.manifest.json").read_bytes()
        )


class TestSimilarity:
    def test_identical_profiles(self, tmp_path, capsys):
        a = write_profile(tmp_path, [[1, 2, 3, 4]], "a.json")
        b = write_profile(tmp_path, [[2, 4, 6, 8]], "b.json")
        code = run_cli("similarity", "--a", str(a), "--b", str(b))
        assert code == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch_exits_one(self, tmp_path, capsys):
        a = write_profile(tmp_path, [[1, 2, 3, 4]], "a.json")
        b = write_profile(tmp_path, [[1, 2]], "b.json")
        assert run_cli("similarity", "--a", str(a), "--b", str(b)) == 1


def test_module_entrypoint_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "headbalance", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip()


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as err:
        run_cli("frobnicate")
    assert err.value.code == 2
