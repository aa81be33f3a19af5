import json
import math

import numpy as np
import pytest

from monopole_cones import cli, gauge, trajio


def run_cli(argv):
    return cli.main(argv)


DIRAC_ARGS = ["simulate", "dirac", "--r0", "1,0,0", "--v0", "0,1,0",
              "--lambda", "2", "--t-end", "10", "--step", "1e-3"]


@pytest.fixture(scope="module")
def dirac_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("runs") / "dirac.csv"
    code = run_cli(DIRAC_ARGS + ["--out", str(path)])
    assert code == 0
    return path


class TestSimulateCommand:
    def test_dirac_end_to_end_conserves_l(self, dirac_csv):
        traj = trajio.read_trajectory(dirac_csv)
        big_l = traj.monitors["L"]
        assert np.max(np.abs(big_l - big_l[0])) < 1e-7

    def test_byte_identical_reruns(self, tmp_path, dirac_csv):
        again = tmp_path / "again.csv"
        assert run_cli(DIRAC_ARGS + ["--out", str(again)]) == 0
        assert again.read_bytes() == dirac_csv.read_bytes()

    def test_yang_colliding_ray_flagged(self, tmp_path):
        path = tmp_path / "ray.csv"
        code = run_cli(["simulate", "yang", "--u", "0.3,0,0,0", "--r", "1",
                        "--du", "0,0,0,0", "--dr", "0.5", "--e", "1,0,0",
                        "--t-end", "1", "--step", "1e-2", "--out", str(path)])
        assert code == 0
        header, first, *_ = path.read_text().splitlines()
        assert header.split(",")[-1] == "colliding"
        assert first.split(",")[-1] == "1"

    def test_missing_flag_exits_two(self, capsys):
        with pytest.raises(SystemExit) as info:
            run_cli(["simulate", "dirac", "--r0", "1,0,0", "--t-end", "1",
                     "--step", "1e-3"])
        assert info.value.code == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_bad_vector_exits_two(self, capsys):
        with pytest.raises(SystemExit) as info:
            run_cli(["simulate", "dirac", "--r0", "1,zap,0", "--v0", "0,1,0",
                     "--lambda", "1", "--t-end", "1", "--step", "1e-3"])
        assert info.value.code == 2

    def test_nonpositive_step_exits_two(self, capsys):
        code = run_cli(["simulate", "dirac", "--r0", "1,0,0", "--v0", "0,1,0",
                        "--lambda", "1", "--t-end", "1", "--step", "0"])
        assert code == 2
        assert "step" in capsys.readouterr().err

    def test_guard_halt_flushes_partial_and_exits_three(self, tmp_path, capsys):
        path = tmp_path / "fall.csv"
        code = run_cli(["simulate", "dirac", "--r0", "1,0,0",
                        "--v0=-1,1e-12,0", "--lambda", "1",
                        "--t-end", "5", "--step", "1e-2",
                        "--adaptive-tol", "1e-9", "--out", str(path)])
        assert code == 3
        assert "halt" in capsys.readouterr().err
        assert len(path.read_text().splitlines()) > 5

    def test_json_lines_output(self, tmp_path):
        path = tmp_path / "run.jsonl"
        code = run_cli(["simulate", "yang", "--u", "0.2,0,0.1,0", "--r", "1.1",
                        "--du", "0.4,0.2,-0.3,0.1", "--dr", "0.1",
                        "--e", "1,0.5,-0.2", "--t-end", "0.2", "--step", "1e-2",
                        "--format", "json-lines", "--out", str(path)])
        assert code == 0
        first = json.loads(path.read_text().splitlines()[0])
        assert first["t"] == 0.0
        assert "norm_e" in first

    def test_cone_geodesic_kind(self, tmp_path):
        path = tmp_path / "cone.csv"
        code = run_cli(["simulate", "cone-geodesic", "--psi", "0.7",
                        "--v", "0.2,0.1,-0.1", "--r", "1.0",
                        "--dv", "0.3,-0.2,0.1", "--dr", "0.05",
                        "--t-end", "2", "--step", "1e-3", "--out", str(path)])
        assert code == 0
        header = path.read_text().splitlines()[0].split(",")
        assert "membership" in header
        data = np.array([[float(c) for c in line.split(",")]
                         for line in path.read_text().splitlines()[1:]])
        membership = data[:, header.index("membership")]
        assert np.max(membership) < 1e-7

    def test_stdout_when_no_out_path(self, capsys):
        code = run_cli(["simulate", "dirac", "--r0", "1,0,0", "--v0", "0,1,0",
                        "--lambda", "2", "--t-end", "0.05", "--step", "1e-2"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("t,x1")
        assert len(out.splitlines()) == 7


class TestAnalyzeCommand:
    def test_dirac_pipeline_aperture(self, dirac_csv, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = run_cli(["analyze", str(dirac_csv), "--out", str(report_path),
                        "--no-figures"])
        assert code == 0
        report = json.loads(report_path.read_text())
        assert abs(report["aperture"] - math.atan(0.5)) < 1e-6
        assert report["l_drift"] < 1e-6
        assert report["colliding"] is False

    def test_straight_line_gives_flat_cone(self, tmp_path, capsys):
        path = tmp_path / "line.csv"
        assert run_cli(["simulate", "dirac", "--r0", "1,0,0", "--v0", "0,1,0",
                        "--lambda", "0", "--t-end", "5", "--step", "1e-3",
                        "--out", str(path)]) == 0
        assert run_cli(["analyze", str(path), "--no-figures"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert abs(report["aperture"] - math.pi / 2) < 1e-6

    def test_yang_analysis(self, tmp_path, capsys):
        path = tmp_path / "yang.csv"
        assert run_cli(["simulate", "yang", "--u", "0.2,-0.1,0.3,0.1",
                        "--r", "1.2", "--du", "0.4,0.2,-0.3,0.1", "--dr", "0.1",
                        "--e", "1,0.5,-0.2", "--t-end", "5", "--step", "1e-3",
                        "--out", str(path)]) == 0
        assert run_cli(["analyze", str(path), "--no-figures"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["kind"] == "yang"
        assert report["l_drift"] < 1e-6
        assert report["geodesic_residual"] < 1e-6

    def test_truncated_file_exits_two(self, dirac_csv, tmp_path, capsys):
        clipped = tmp_path / "clipped.csv"
        lines = dirac_csv.read_text().splitlines()
        lines[40] = lines[40][: len(lines[40]) // 2]
        clipped.write_text("\n".join(lines))
        assert run_cli(["analyze", str(clipped)]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_two(self, tmp_path, capsys):
        assert run_cli(["analyze", str(tmp_path / "nope.csv")]) == 2

    def test_colliding_file_exits_four_with_report(self, tmp_path, capsys):
        path = tmp_path / "ray.csv"
        assert run_cli(["simulate", "yang", "--u", "0.3,0,0,0", "--r", "1",
                        "--du", "0,0,0,0", "--dr", "0.5", "--e", "1,0,0",
                        "--t-end", "1", "--step", "1e-2", "--out", str(path)]) == 0
        code = run_cli(["analyze", str(path)])
        assert code == 4
        report = json.loads(capsys.readouterr().out)
        assert report["colliding"] is True

    def test_figures_rendered_next_to_report(self, dirac_csv, tmp_path, capsys):
        report_path = tmp_path / "figs" / "report.json"
        assert run_cli(["analyze", str(dirac_csv), "--out", str(report_path)]) == 0
        rendered = sorted(p.name for p in report_path.parent.glob("*.png"))
        assert rendered == ["report.cone.png", "report.monitors.png",
                            "report.trajectory.png"]


class TestVerifyCommand:
    def test_small_battery_passes(self, capsys):
        code = run_cli(["verify", "--seed", "42", "--count", "2"])
        out = capsys.readouterr().out
        assert code == 0, out
        assert out.count("PASS") == 10
        assert "all 10 criteria passed" in out

    def test_count_zero_exits_two(self, capsys):
        with pytest.raises(SystemExit) as info:
            run_cli(["verify", "--count", "0"])
        assert info.value.code == 2

    def test_corrupted_charge_matrix_fails_conservation(self, monkeypatch, capsys):
        honest = gauge.charge_matrix

        def corrupted(e):
            matrix = np.array(honest(e))
            matrix[..., 0, 1] = -matrix[..., 0, 1]     # break antisymmetry
            return matrix

        monkeypatch.setattr(gauge, "charge_matrix", corrupted)
        code = run_cli(["verify", "--seed", "7", "--count", "2",
                        "--t-end", "3"])
        out = capsys.readouterr().out
        assert code == 1
        assert "FAILED criteria" in out
        failing_line = [line for line in out.splitlines()
                        if line.startswith("FAILED criteria")][0]
        assert "4" in failing_line                     # conservation criterion
        assert "su(2) conservation" in out
