import json
import re
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from freefusion import cli
from freefusion.datagen import WINDOW_STARTS, default_battery, generate_scenario, save_csv
from freefusion.datagen import ScenarioSpec, load_csv
from freefusion.empirical import Histogram
from freefusion.errors import ConvergenceError
from freefusion.spectra import MpParams, SpectralDensity, mp_density

SVG = "{http://www.w3.org/2000/svg}"


def run(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture(scope="module")
def windows(tmp_path_factory):
    d = tmp_path_factory.mktemp("windows")
    for s in default_battery(seed=0):
        save_csv(s.window(), d / f"{s.label}.csv")
    return d


def test_mp(tmp_path):
    out = tmp_path / "mp.csv"
    assert run("mp", "--c", 1, "--sigma2", 1, "--out", out) == 0
    d = SpectralDensity.from_csv(out)
    assert d.grid[-1] == pytest.approx(4.0)
    assert d.mass() == pytest.approx(1.0, abs=1e-3)


def test_mp_bad_ratio(tmp_path, capsys):
    assert run("mp", "--c", 1.5, "--out", tmp_path / "x.csv") == 2
    assert "c must lie" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("asd", "--poly", "p7", "--out", tmp_path / "x.csv")
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run("frobnicate")
    assert info.value.code == 2
    assert run("asd", "--poly", "p0", "--out", tmp_path / "x.csv") == 2


def test_asd_p1_defaults(tmp_path):
    out = tmp_path / "p1.csv"
    assert run("asd", "--poly", "p1", "--out", out) == 0
    d = SpectralDensity.from_csv(out)
    assert d.support[1] == pytest.approx(5.83, abs=0.05)


def test_asd_p2_defaults(tmp_path):
    out = tmp_path / "p2.csv"
    assert run("asd", "--poly", "p2", "--out", out) == 0
    assert SpectralDensity.from_csv(out).mass() == pytest.approx(1.0, abs=0.02)


def test_numeric_failure_exit_1(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise ConvergenceError("no luck", residual=1.0)

    monkeypatch.setattr(cli, "asd_p1", boom)
    assert run("asd", "--poly", "p1", "--out", tmp_path / "x.csv") == 1
    assert "numerical failure" in capsys.readouterr().err


def test_esd(tmp_path, windows):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["esd", "--v0", windows / "noise.csv", "--trials", 10, "--seed", 4]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    h = Histogram.from_csv(a)
    assert h.total == 10 * 118
    assert h.ks_distance(mp_density(MpParams())) < 0.05


def test_esd_needs_second_window(tmp_path, windows):
    assert run("esd", "--v0", windows / "noise.csv", "--poly", "p1", "--out", tmp_path / "h.csv") == 2


def test_esd_missing_file(tmp_path):
    assert run("esd", "--v0", tmp_path / "nope.csv", "--out", tmp_path / "h.csv") == 2


@pytest.mark.parametrize("label,expected", [("noise", "H0"), ("step", "H1")])
def test_detect_auto(tmp_path, windows, label, expected):
    out = tmp_path / "r.json"
    rc = run("detect", "--v0", windows / "reference.csv", "--v1", windows / f"{label}.csv",
             "--poly", "p1", "--trials", 20, "--auto", "--out", out)
    assert rc == 0
    assert f'"decision": "{expected}"' in out.read_text()


def test_detect_from_hist_and_bound_files(tmp_path, windows):
    hist, bound, out = tmp_path / "h.csv", tmp_path / "b.csv", tmp_path / "r.json"
    assert run("esd", "--v0", windows / "step.csv", "--trials", 10, "--out", hist) == 0
    assert run("mp", "--out", bound) == 0
    assert run("detect", "--hist", hist, "--bound", bound, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["decision"] == "H1"
    assert rep["support_used"] == pytest.approx([0.0, 4.0], abs=0.02)


def test_detect_malformed_bound(tmp_path, windows):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,rho\n0,zero\n")
    rc = run("detect", "--v0", windows / "noise.csv", "--bound", bad, "--out", tmp_path / "r.json")
    assert rc == 2


def test_detect_flag_conflicts(tmp_path, windows):
    out = tmp_path / "r.json"
    assert run("detect", "--v0", windows / "noise.csv", "--out", out) == 2
    assert run("detect", "--auto", "--out", out) == 2


def test_simulate(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"kind": "reference", "seed": 11}))
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("simulate", "--scenario", spec, "--out", a) == 0
    assert run("simulate", "--scenario", spec, "--out", b) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted([f"{k}.csv" for k in WINDOW_STARTS] + ["timeseries.csv"])
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()
    full = generate_scenario(ScenarioSpec("reference", seed=11)).entries
    assert np.array_equal(load_csv(a / "V3.csv"), full[:, 3300:3418])


@pytest.mark.parametrize("doc", ['{"kind": "tsunami"}', "[1, 2", '{"kind": "step", "magnitude": 1}'])
def test_simulate_bad_spec(tmp_path, doc):
    spec = tmp_path / "s.json"
    spec.write_text(doc)
    assert run("simulate", "--scenario", spec, "--out", tmp_path / "o") == 2


def test_plot(tmp_path, windows):
    mp, hist, svg = tmp_path / "mp.csv", tmp_path / "h.csv", tmp_path / "o.svg"
    run("mp", "--out", mp)
    run("esd", "--v0", windows / "step.csv", "--trials", 5, "--out", hist)
    assert run("plot", "--density", mp, "--hist", hist, "--out", svg) == 0
    root = ET.parse(svg).getroot()
    assert root.tag == f"{SVG}svg" and root.get("version") == "1.1"
    assert len(root.findall(f"{SVG}polyline")) == 1
    groups = [g for g in root.findall(f"{SVG}g") if g.get("class") == "histogram"]
    assert len(groups) == 1
    # every drawn x lies inside the plotting area
    xs = [float(v) for v in re.findall(r'(?:x|points=")="?(-?\d+\.\d+)', svg.read_text())]
    pts = root.find(f"{SVG}polyline").get("points").split()
    xs += [float(p.split(",")[0]) for p in pts]
    assert min(xs) >= 0 and max(xs) <= 800


def test_plot_without_inputs(tmp_path):
    assert run("plot", "--out", tmp_path / "o.svg") == 2


def test_report(tmp_path):
    out = tmp_path / "rep"
    assert run("report", "--poly", "p1", "--trials", 20, "--seed", 3, "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["severity_ranking"] == ["noise", "rampA", "rampB", "step", "collapse"]
    for label in ["noise", "rampA", "rampB", "step", "collapse"]:
        rep = json.loads((out / f"{label}.json").read_text())
        assert set(rep) >= {"decision", "outlier_count", "support_used"}


def test_report_custom_scenarios(tmp_path):
    bat = [s.to_dict() for s in default_battery(seed=1)][:2]
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps(bat))
    out = tmp_path / "rep"
    assert run("report", "--scenarios", spec, "--poly", "p0", "--trials", 5, "--out", out) == 0
    assert json.loads((out / "summary.json").read_text())["decisions"] == {"step": "H1"}


@pytest.mark.xfail(
    strict=True,
    reason="P0 is at least as sensitive to the rank-one ramp component as P1; ramps strong "
    "enough for P1 outliers also produce P0 outliers",
)
def test_report_p0_classifies_ramps_h0(tmp_path):
    out = tmp_path / "rep"
    assert run("report", "--poly", "p0", "--trials", 20, "--out", out) == 0
    decisions = json.loads((out / "summary.json").read_text())["decisions"]
    assert decisions["rampA"] == decisions["rampB"] == "H0"


def test_console_entry_point(tmp_path):
    out = tmp_path / "mp.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "freefusion.cli", "mp", "--c", "0.5", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
