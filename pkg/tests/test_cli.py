import json
import math
import os

import numpy as np
import pytest

from rollmono import cli, svgplot
from rollmono.config import RunConfig, load_config


def run_cli(*argv):
    return cli.run(list(argv))


def test_gmatrix_identity_row(tmp_path):
    out = str(tmp_path / "g")
    assert run_cli("--out", out, "gmatrix", "--gamma3", "0") == 0
    lines = (tmp_path / "g" / "gmatrix.csv").read_text().splitlines()
    assert lines[0].startswith("gamma3")
    row = [float(v) for v in lines[1].split(",")]
    assert row == [0.0, 1.0, 0.0, 0.0, 1.0, 0.0]


def test_gmatrix_grid_and_determinism(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert run_cli("--out", out1, "gmatrix", "--grid", "16") == 0
    assert run_cli("--out", out2, "gmatrix", "--grid", "16") == 0
    a = (tmp_path / "a" / "gmatrix.csv").read_bytes()
    b = (tmp_path / "b" / "gmatrix.csv").read_bytes()
    assert a == b
    report = json.loads((tmp_path / "a" / "gmatrix_report.json").read_text())
    assert report["pass"] is True


def test_simulate_emits_trajectory(tmp_path):
    out = str(tmp_path / "s")
    assert run_cli("--out", out, "simulate", "--t-end", "5",
                   "--M", "0.3,-0.2,0.4", "--gamma", "0.1,0.7,0.7") == 0
    lines = (tmp_path / "s" / "trajectory.csv").read_text().splitlines()
    assert "t (time)" in lines[0]
    ts = [float(line.split(",")[0]) for line in lines[1:]]
    assert ts == sorted(ts) and ts[0] == 0.0 and ts[-1] == 5.0


def test_bifurcate_with_config(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        "[grid]\nj_min = -0.6\nj_max = 0.6\nj_points = 5\n"
        "spin_points = 5\nslice_points = 11\n"
    )
    out = str(tmp_path / "b")
    assert run_cli("--config", str(config), "--out", out, "bifurcate") == 0
    for name in ("surface.csv", "curves.csv", "slice_j1.svg", "slice_j2.svg"):
        assert (tmp_path / "b" / name).exists()
    surface = (tmp_path / "b" / "surface.csv").read_text().splitlines()
    assert surface[0] == "j1 (integral),j2 (integral),gamma3 (1),h (energy)"


def test_monodromy_command(tmp_path):
    out = str(tmp_path / "m")
    code = run_cli("--out", out, "--workers", "2", "monodromy",
                   "--plane", "p_psi=0.157", "--enclose", "1", "--samples", "64")
    assert code == 0
    payload = json.loads((tmp_path / "m" / "monodromy.json").read_text())
    assert abs(payload["k"]) == 1
    assert payload["closure_defect"] <= 0.05
    assert len(payload["samples"]) >= 64
    for name in ("torus_image.svg", "image3d.csv", "proj_normal.svg",
                 "proj_axis.svg"):
        assert (tmp_path / "m" / name).exists()


def test_monodromy_enclosing_both(tmp_path):
    out = str(tmp_path / "mb")
    code = run_cli("--out", out, "--workers", "2", "monodromy",
                   "--plane", "p_psi=0.157", "--enclose", "both",
                   "--samples", "64")
    assert code == 0
    payload = json.loads((tmp_path / "mb" / "monodromy.json").read_text())
    assert abs(payload["k"]) == 2
    assert payload["closure_defect"] <= 0.05
    assert payload["radius"] == pytest.approx(0.257, abs=1e-12)


def test_pole_start_is_numerical_error(tmp_path, capsys):
    out = str(tmp_path / "p")
    code = run_cli("--out", out, "simulate", "--t-end", "1",
                   "--M", "0.3,0,0", "--gamma", "0,0,1")
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["kind"] == "numerical"
    assert err["error"] == "VerticalStateError"


def test_unknown_plane_is_config_error(tmp_path, capsys):
    out = str(tmp_path / "x")
    assert run_cli("--out", out, "monodromy", "--plane", "bogus=1") == 1
    err = json.loads(capsys.readouterr().err.strip())
    assert err["kind"] == "config"


def test_plane_model_mismatch_is_config_error(tmp_path):
    out = str(tmp_path / "x")
    assert run_cli("--model", "rough", "--out", out, "monodromy",
                   "--plane", "p_psi=0.157") == 1


def test_unknown_config_key_is_config_error(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("[body]\nbogus = 1\n")
    assert run_cli("--config", str(config), "--out", str(tmp_path / "o"),
                   "gmatrix", "--gamma3", "0") == 1


def test_usage_error_exit_code():
    assert run_cli("monodromy", "--enclose", "everything") == 1


def test_reproduce_subset(tmp_path, capsys):
    out = str(tmp_path / "r")
    assert run_cli("--out", out, "reproduce", "--criteria", "5,6") == 0
    stdout = capsys.readouterr().out
    assert "criterion 5 [PASS]" in stdout
    assert "criterion 6 [PASS]" in stdout
    report = json.loads((tmp_path / "r" / "acceptance.json").read_text())
    assert [r["criterion"] for r in report] == ["5", "6"]
    assert all(r["pass"] for r in report)


def test_config_defaults_match_reference_parameters():
    cfg = RunConfig()
    params = cfg.body_params()
    assert (params.I1, params.I3, params.b1, params.b3, params.m, params.g) == (
        1.0, 1.5, 1.0, 2.0, 1.0, 1.0)
    assert cfg.rel_tol == 1e-10


def test_config_file_overrides(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("[body]\nI3 = 2.5\n[run]\nmodel = rough\nseed = 7\n")
    cfg = load_config(str(config))
    assert cfg.I3 == 2.5
    assert cfg.model == "rough"
    assert cfg.seed == 7


# SVG emitter contracts


def test_svg_deterministic(tmp_path):
    pts = np.column_stack([np.linspace(0, 1, 20), np.sin(np.linspace(0, 5, 20))])
    style = svgplot.PlotStyle(title="t", xlabel="x", ylabel="y")
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    svgplot.emit_svg([svgplot.Polyline(pts)], style, p1)
    svgplot.emit_svg([svgplot.Polyline(pts)], style, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_svg_splits_wrapped_polyline(tmp_path):
    alphas = np.linspace(0.0, 2.0 * math.pi, 50)
    wrapped = np.mod(3.0 * alphas, 2.0 * math.pi)
    pts = np.column_stack([alphas, wrapped])
    path = tmp_path / "w.svg"
    svgplot.emit_svg([svgplot.Polyline(pts, split_gap=math.pi)],
                     svgplot.PlotStyle(), path)
    assert path.read_text().count("<polyline") == 3


def test_svg_empty_dataset_rejected(tmp_path):
    with pytest.raises(ValueError):
        svgplot.emit_svg([svgplot.Polyline(np.empty((0, 2)))],
                         svgplot.PlotStyle(), tmp_path / "e.svg")
