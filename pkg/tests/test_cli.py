import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import SPECS
from kpwaves.cli import main
from kpwaves.io import read_csv, read_pgm
from kpwaves.kinematics import scale_spec
from kpwaves.model import load_spec, read_spec
from kpwaves.otin import detect_otin, otin_sweep_config, sweep


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_zero_wall(capsys):
    code, out, _ = run(capsys, "eval", "--spec", SPECS / "wall_zero.json", "--point", "0,0,0")
    assert code == 0 and out.strip() == "0"


def test_eval_quantity_and_negative_point(capsys):
    code, out, _ = run(capsys, "eval", "--spec", SPECS / "wall.json", "--point", "-1,-2,0.5",
                       "--quantity", "log")
    assert code == 0 and float(out) > 0


@pytest.mark.parametrize("argv, code", [
    (["eval", "--spec", SPECS / "invalid.json", "--point", "0,0,0"], 1),
    (["eval", "--spec", SPECS / "no_such_file.json", "--point", "0,0,0"], 2),
    (["eval", "--spec", SPECS / "wall.json", "--point", "0,0"], 1),
    (["eval", "--spec", SPECS / "wall.json", "--point", "0,0,0", "--quantity", "cube"], 1),
    (["render", "--spec", SPECS / "wall.json", "--grid", "1,0,0,1,3,3"], 1),
    (["frobnicate"], 1),
    ([], 1),
    (["eval", "--point", "0,0,0"], 1),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_malformed_document(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": "Wall",')
    code, _, err = run(capsys, "eval", "--spec", bad, "--point", "0,0,0")
    assert code == 1 and "line" in err


def test_write_failure_is_runtime_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "render", "--spec", SPECS / "wall.json", "--out", blocker / "a" / "f.csv",
                       "--grid", "-1,1,-1,1,3,3", "--no-figure")
    assert code == 2 and "cannot write" in err


def test_render_is_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}" / "fig1.pgm"
        code, _, _ = run(capsys, "render", "--spec", SPECS / "fig1.json", "--quantity", "log",
                         "--t", "0", "--out", out, "--format", "both")
        assert code == 0
        outs.append(out)
    for suffix in (".pgm", ".csv", ".png"):
        a, b = (o.with_suffix(suffix).read_bytes() for o in outs)
        assert a == b, suffix
    lev, comments = read_pgm(outs[0].read_bytes())
    assert lev.shape == (200, 200) and "quantity log" in comments
    fld = read_csv(outs[0].with_suffix(".csv").read_bytes())
    assert fld.singular_mask.any()


def test_render_default_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "render", "--spec", SPECS / "wall.json", "--grid", "-1,1,0,1,3,2")
    assert code == 0 and out.split() == ["field.csv", "field.pgm", "field.png"]
    assert (tmp_path / "field.csv").read_text().splitlines()[0] == "x,y,value,masked"
    assert len((tmp_path / "field.csv").read_text().splitlines()) == 7


def test_residual_report(capsys):
    code, out, _ = run(capsys, "residual", "--spec", SPECS / "wall.json", "--grid", "-5,5,-5,5,11,11")
    rep = json.loads(out)
    assert code == 0 and rep["observed_order"] == pytest.approx(2.0, abs=0.05)
    code, out, _ = run(capsys, "residual", "--spec", SPECS / "wall.json", "--grid", "-5,5,-5,5,11,11",
                       "--physical")
    assert code == 0 and json.loads(out)["observed_order"] > 1.9


def test_velocity(capsys):
    code, out, _ = run(capsys, "velocity", "--spec", SPECS / "fig5.json")
    v = json.loads(out)
    assert code == 0 and v["kind"] == "unique" and len(v["singular_line"]) == 3
    code, out, _ = run(capsys, "velocity", "--spec", SPECS / "fig1.json")
    assert json.loads(out)["kind"] == "degenerate"


def test_dispersion_table(tmp_path, capsys):
    out = tmp_path / "disp.csv"
    code, _, _ = run(capsys, "dispersion", "--k", "0.1,0.2", "--g", "1", "--h", "1", "--out", out)
    rows = out.read_text().splitlines()
    assert code == 0 and rows[0] == "k,l,omega_exact,omega_kp,abs_error" and len(rows) == 3
    assert float(rows[1].split(",")[3]) == pytest.approx(0.1 - 0.1**3 / 6, rel=1e-14)
    assert out.with_suffix(".png").exists()


def test_otin_scan_matches_library(tmp_path, capsys):
    grid = "-15,15,-15,15,90,90"
    code, out, _ = run(capsys, "otin-scan", "--spec", SPECS / "fig17.json", "--grid", grid,
                       "--out", tmp_path / "scan", "--quantity", "clamp:10")
    summary = json.loads(out)
    spec = read_spec(SPECS / "fig17.json")
    from kpwaves.model import GridSpec
    ev = detect_otin(sweep(otin_sweep_config(spec, GridSpec(-15, 15, -15, 15, 90, 90))))
    assert code == 0
    assert summary["ratio"] == ev.ratio and summary["otin"] == (ev.ratio >= 3)
    names = sorted(p.name for p in (tmp_path / "scan").iterdir())
    assert {"events.json", "peak.png"} <= set(names)
    assert len([n for n in names if n.startswith("frame_")]) == 17


def test_singular_curve(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, _, _ = run(capsys, "singular-curve", "--spec", SPECS / "fig1.json", "--out", out)
    rows = out.read_text().splitlines()
    assert code == 0 and rows[0] == "segment,x,y" and len(rows) > 10
    xy = np.array([[float(v) for v in r.split(",")[1:]] for r in rows[1:]])
    assert np.max(np.abs(xy[:, 0] + 0.2 * xy[:, 1])) < 1.0


def test_scale(capsys):
    code, out, _ = run(capsys, "scale", "--spec", SPECS / "fig17.json", "--delta", "2")
    assert code == 0
    assert load_spec(out) == scale_spec(read_spec(SPECS / "fig17.json"), 2.0)
    assert run(capsys, "scale", "--spec", SPECS / "wall.json", "--delta", "-1")[0] == 1


def test_to_physical(capsys):
    code, out, _ = run(capsys, "to-physical", "--point", "0,0,0", "--f", "1", "--h", "50",
                       "--rho-density", "1025")
    d = json.loads(out)
    a2 = 2.0 / 50**2
    assert code == 0 and d["eta0"] == pytest.approx(4 / (0.3 * a2), rel=1e-14)
    assert d["surface_height_m"] == pytest.approx(0.1 * 50 * d["eta0"], rel=1e-14)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kpwaves", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("kpwaves ")
