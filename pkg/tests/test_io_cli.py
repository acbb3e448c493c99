import csv
import json

import numpy as np
import pytest

from conftest import series_of
from magcal.cli import main
from magcal.core import SampleSeries
from magcal.io import CSVParseError, read_series, write_series


def test_csv_round_trip_exact(tmp_path, rng):
    s = SampleSeries.from_samples(rng.normal(0, 45_000, (200, 3)), 3000.0, t0=0.125, label="run1")
    write_series(s, tmp_path / "s.csv")
    back = read_series(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.t, s.t)
    np.testing.assert_array_equal(back.b, s.b)
    assert back.sample_rate == s.sample_rate and back.label == "run1"


def test_csv_infers_rate(tmp_path):
    (tmp_path / "a.csv").write_text("t,bx,by,bz\n0,1,2,3\n0.5,1,2,3\n1.0,1,2,3\n")
    s = read_series(tmp_path / "a.csv")
    assert s.sample_rate == pytest.approx(2.0)
    assert len(s) == 3


@pytest.mark.parametrize("body,line", [
    ("t,bx,by,bz\n0,1,2,3\n1,1,x,3\n", 3),
    ("# c\nt,bx,by,bz\n0,1,2,3\n1,1,2\n", 4),
    ("t,bx,by\n0,1,2\n", 1),
    ("t,bx,by,bz\n0,1,2,3\n\n0,1,2,3\n", 4),
    ("t,bx,by,bz\n0,1,2,nan\n", 2),
])
def test_csv_errors_carry_line(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(CSVParseError) as exc:
        read_series(p)
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


@pytest.fixture(scope="module")
def sim(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--output", str(d / "run"), "--n", "20000", "--seed", "1"]) == 0
    return d


def test_simulate_outputs(sim):
    raw = read_series(sim / "run.raw.csv")
    ideal = read_series(sim / "run.ideal.csv")
    assert len(raw) == len(ideal) == 20000
    truth = json.loads((sim / "run.truth.json").read_text())
    assert truth["truth"]["noise_sigma"] == 0.1
    assert truth["plan"]["n_samples"] == 20000
    np.testing.assert_allclose(ideal.magnitudes(), 45_000, rtol=1e-12)


@pytest.mark.parametrize("cmd", [["calibrate-geo"], ["calibrate-nn", "--epochs", "40"],
                                 ["calibrate", "--method", "geo"]])
def test_calibrate_and_apply(sim, tmp_path, cmd):
    model = tmp_path / "model.json"
    assert main(cmd + ["--input", str(sim / "run.raw.csv"), "--output", str(model)]) == 0
    rep = json.loads((tmp_path / "model.report.json").read_text())
    for key in ("method", "input", "window_seconds", "target_field", "ptp_before", "ptp_after",
                "var_before", "var_after", "n_samples", "before", "after"):
        assert key in rep
    assert rep["ptp_after"] < rep["ptp_before"] / 100
    out = tmp_path / "cal.csv"
    assert main(["apply", "--input", str(sim / "run.raw.csv"), "--model", str(model),
                 "--output", str(out)]) == 0
    cal = read_series(out)
    assert np.ptp(cal.magnitudes()) == pytest.approx(rep["ptp_after"], rel=1e-9)
    ev = tmp_path / "ev.json"
    assert main(["evaluate", "--input", str(sim / "run.raw.csv"), "--model", str(model),
                 "--output", str(ev)]) == 0
    assert json.loads(ev.read_text())["ptp"] == pytest.approx(rep["ptp_after"], rel=1e-9)


def test_preset_window(sim, tmp_path):
    model = tmp_path / "m.json"
    assert main(["calibrate-geo", "--input", str(sim / "run.raw.csv"), "--output", str(model),
                 "--window-seconds", "0.01"]) == 0
    rep = json.loads((tmp_path / "m.report.json").read_text())
    assert rep["window_seconds"] == 0.01
    assert rep["n_samples"] == 20000 - 30 + 1


def test_coverage_command(sim, tmp_path):
    out = tmp_path / "cov.json"
    assert main(["coverage", "--input", str(sim / "run.raw.csv"), "--output", str(out),
                 "--summary"]) == 0
    d = json.loads(out.read_text())
    assert 0 < d["percent"] <= 1 and "bald_cells" not in d


def test_exit_codes(tmp_path, sim):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,bx,by,bz\n0,1,2,oops\n")
    assert main(["evaluate", "--input", str(bad), "--output", str(tmp_path / "e.json")]) == 3
    assert main(["evaluate", "--input", str(tmp_path / "missing.csv"),
                 "--output", str(tmp_path / "e.json")]) == 5
    # a flat ring of samples cannot determine an ellipsoid
    t = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    ring = series_of(45_000 * np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)]))
    write_series(ring, tmp_path / "ring.csv")
    assert main(["calibrate-geo", "--input", str(tmp_path / "ring.csv"),
                 "--output", str(tmp_path / "m.json")]) == 4
    with pytest.raises(SystemExit) as exc:
        main(["calibrate-geo", "--input", str(sim / "run.raw.csv")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--output", str(tmp_path / "x"), "--n", "0"])
    assert exc.value.code == 2


def test_small_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--output", str(out), "--n-seeds", "1", "--n-samples", "3000",
                 "--epochs", "5", "--sigmas", "0.1,0.3"]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10 * 2 * 2
    assert {r["method"] for r in rows} == {"geo", "nn"}
    ex = json.loads((tmp_path / "sweep.extrapolation.json").read_text())
    assert ex["extrapolated_minutes"] == pytest.approx(2 * 0.6 / 0.26)
    assert (tmp_path / "sweep.runs.csv").exists()


def test_single_method_sweep_table_shape(tmp_path):
    out = tmp_path / "geo.csv"
    assert main(["sweep", "--output", str(out), "--n-seeds", "1", "--n-samples", "2000",
                 "--methods", "geo"]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 20
    assert list(rows[0]) == ["coverage", "sigma", "method", "ptp", "variance"]
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--output", str(out), "--methods", "geo,svm"])
    assert exc.value.code == 2
