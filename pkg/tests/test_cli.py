import csv
import json

import numpy as np
import pytest

from latentode.cli import main, parse_config_file, parse_horizons
from latentode.dynamics import integrate, make_system
from latentode.errors import InvalidArgument
from latentode.io import read_forecast, read_timeseries, write_timeseries


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def osc_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "osc.csv"
    assert run(["simulate", "oscillator", "--seed", 3, "-o", path]) == 0
    return path


def test_simulate_lorenz_shape(tmp_path):
    out = tmp_path / "lorenz.csv"
    assert run(["simulate", "lorenz", "--steps", 5000, "-o", out]) == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "x", "y", "z"]
    assert len(rows) == 5002
    assert all(len(r) == 4 for r in rows)


def test_simulate_matches_library(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["simulate", "rossler", "--x0", "1,2,0.5", "--steps", 300, "-o", out]) == 0
    ts = integrate(make_system("rossler"), [1.0, 2.0, 0.5], 0.01, 300)
    assert np.array_equal(read_timeseries(out).values, ts.values)


def test_simulate_rejects_zero_dt(tmp_path, capsys):
    assert run(["simulate", "lorenz", "--dt", 0, "-o", tmp_path / "x.csv"]) == 2
    assert not (tmp_path / "x.csv").exists()


def test_simulate_rejects_wrong_state_length(tmp_path):
    assert run(["simulate", "lorenz", "--x0", "1,2", "-o", tmp_path / "x.csv"]) == 2


def test_csv_round_trip_is_bitwise(tmp_path, osc_csv):
    ts = read_timeseries(osc_csv)
    again = tmp_path / "again.csv"
    write_timeseries(ts, again)
    assert again.read_bytes() == osc_csv.read_bytes()
    back = read_timeseries(again)
    assert np.array_equal(back.values, ts.values)
    assert back.dt == ts.dt


def test_read_rejects_irregular_sampling(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x\n0.0,1.0\n0.1,2.0\n0.3,3.0\n")
    with pytest.raises(InvalidArgument):
        read_timeseries(bad)


def test_fit_prints_equation(tmp_path, osc_csv, capsys):
    model = tmp_path / "m.json"
    assert run(["fit", osc_csv, "--channel", "x", "--train-length", 4800,
                "--display-threshold", 1e-3, "-o", model]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[x] f'' = ")
    d = json.loads(model.read_text())
    coef = dict(zip(d["monomials"], d["coefficients"]))
    assert abs(coef["f"] + 1) < 0.01 and abs(coef["f'"] - 0.1) < 0.01


def test_missing_input(tmp_path):
    assert run(["fit", tmp_path / "nope.csv", "--channel", "x", "-o", tmp_path / "m.json"]) == 2


def test_forecast_and_evaluate(tmp_path, osc_csv, capsys):
    model = tmp_path / "m.json"
    assert run(["fit", osc_csv, "--channel", "x", "--train-length", 4800, "-o", model]) == 0
    fc = tmp_path / "f.csv"
    assert run(["forecast", model, osc_csv, "--channel", "x", "--train-length", 4800,
                "-o", fc]) == 0
    rows = read_csv(fc)
    assert rows[0] == ["horizon", "prediction", "truth", "smape"]
    assert len(rows) == 201
    rep = read_forecast(fc)
    assert rep.smape_by_horizon[-1] < 0.02
    capsys.readouterr()
    assert run(["evaluate", model, osc_csv, "--channel", "x", "--train-length", 4800]) == 0
    table = capsys.readouterr().out.splitlines()
    assert len(table) == 16
    last = table[-1].split()
    assert float(last[2]) < float(last[3])


def test_forecast_dt_mismatch(tmp_path, osc_csv):
    model = tmp_path / "m.json"
    assert run(["fit", osc_csv, "--channel", "x", "--train-length", 4800, "-o", model]) == 0
    d = json.loads(model.read_text())
    d["dt"] = 0.02
    model.write_text(json.dumps(d))
    assert run(["forecast", model, osc_csv, "--channel", "x", "-o", tmp_path / "f.csv"]) == 2


def test_multichannel_fit_and_forecast(tmp_path):
    data = tmp_path / "l.csv"
    assert run(["simulate", "lorenz", "--steps", 2000, "-o", data]) == 0
    model = tmp_path / "m.json"
    assert run(["fit", data, "--channel", "x,y,z", "--target-order", 1, "--degree", 2,
                "--train-length", 1900, "-o", model]) == 0
    out = tmp_path / "f.csv"
    assert run(["forecast", model, data, "--train-length", 1900, "--horizons", "1..50",
                "-o", out]) == 0
    for ch in "xyz":
        rows = read_csv(tmp_path / f"f_{ch}.csv")
        assert len(rows) == 51


def test_experiment_outputs_are_reproducible(tmp_path, capsys):
    argv = ["experiment", "--preset", "oscillator-x", "--n-seeds", 2, "--horizons", "1..20",
            "--no-timing", "--quiet"]
    assert run(argv + ["-o", tmp_path / "a"]) == 0
    assert run(argv + ["-o", tmp_path / "b"]) == 0
    for ext in ("json", "csv"):
        assert (tmp_path / f"a.{ext}").read_bytes() == (tmp_path / f"b.{ext}").read_bytes()
    rows = read_csv(tmp_path / "a.csv")
    assert rows[0] == ["seed", "target_order", "horizon", "smape", "fit_time"]
    assert len(rows) == 1 + 2 * 3 * 20
    assert "oscillator-x: 2 seeds" in capsys.readouterr().out


def test_experiment_config_file(tmp_path):
    cfg = tmp_path / "exp.txt"
    cfg.write_text("# short run\nn_seeds = 1\nseries_length = 1200\ntarget_orders = 2\n"
                   "horizons = 1..10\nparams.a = 0.2\nlasso.n_lambdas = 30\n")
    parsed = parse_config_file(cfg)
    assert parsed["n_seeds"] == 1 and parsed["target_orders"] == (2,)
    assert parsed["params"] == {"a": 0.2}
    assert parsed["lasso"].n_lambdas == 30
    assert run(["experiment", "--preset", "oscillator-x", "--config", cfg, "--quiet",
                "-o", tmp_path / "r"]) == 0
    res = json.loads((tmp_path / "r.json").read_text())
    assert res["params"]["a"] == 0.2
    assert res["n_seeds"] == 1 and list(res["orders"]) == ["2"]


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("bogus = 1\n")
    assert run(["experiment", "--preset", "lorenz-x", "--config", bad, "-o", tmp_path / "r"]) == 2
    bad.write_text("n_seeds = many\n")
    with pytest.raises(InvalidArgument, match="bad.txt:1"):
        parse_config_file(bad)


def test_parse_horizons():
    assert parse_horizons("1..5").tolist() == [1, 2, 3, 4, 5]
    assert parse_horizons("1,5,10").tolist() == [1, 5, 10]
    assert parse_horizons("1..3,7").tolist() == [1, 2, 3, 7]
