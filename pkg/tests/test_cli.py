import csv

import numpy as np
import pytest
from scipy import stats

from normboost import synth
from normboost.boosting import load_model, predict
from normboost.cli import main, read_csv, sidecar_path

FAST = ["--iterations", "25", "--learning-rate", "0.3", "--max-depth", "3"]


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n", "1500", "--seed", "1", "--output", str(d / "train.csv")]) == 0
    assert main(["synth", "--n", "400", "--seed", "2", "--output", str(d / "test.csv")]) == 0
    assert main(["train", "--input", str(d / "train.csv"), "--output", str(d / "m.json")] + FAST) == 0
    return d


def test_synth_deterministic(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert main(["synth", "--n", "50", "--seed", "9", "--output", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.sigma.csv").read_bytes() == (tmp_path / "b.sigma.csv").read_bytes()


def test_synth_sidecar_matches_formula(tmp_path):
    out = str(tmp_path / "h.csv")
    assert main(["synth", "--n", "200", "--d", "3", "--seed", "5", "--output", out]) == 0
    names, X, y = read_csv(out, "y")
    assert names == ["x1", "x2", "x3"] and len(y) == 200
    sigma = np.array([float(r["sigma"]) for r in rows_of(sidecar_path(out))])
    assert np.array_equal(sigma, 0.1 + 0.9 * X[:, 1])


def test_lognormal_family_is_log_normal():
    data = synth.generate(100_000, family="lognormal", seed=3)
    assert np.all(data.y > 0)
    assert abs(stats.skew(np.log(data.y))) < 0.2


def test_synth_rejects_small_n(tmp_path):
    assert main(["synth", "--n", "5", "--output", str(tmp_path / "x.csv")]) == 2


def test_train_writes_model_and_trace(workdir):
    model = load_model((workdir / "m.json").read_text())
    assert len(model.iterations) == 25
    trace = [float(r["train_nll"]) for r in rows_of(str(workdir / "m.json") + ".nll.csv")]
    assert len(trace) == 25 and all(b <= a for a, b in zip(trace, trace[1:]))


def test_train_is_byte_deterministic(workdir, tmp_path):
    args = ["train", "--input", str(workdir / "train.csv")] + FAST
    assert main(args + ["--output", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--output", str(tmp_path / "b.json"), "--threads", "4"]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (workdir / "m.json").read_bytes()


def test_iterations_zero_is_usage_error(workdir, tmp_path):
    code = main(["train", "--input", str(workdir / "train.csv"), "--output",
                 str(tmp_path / "m.json"), "--iterations", "0"])
    assert code == 1


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["train", "--bogus"])
    assert e.value.code == 1


def test_predict_round_trip(workdir, tmp_path):
    out = tmp_path / "p.csv"
    assert main(["predict", "--model", str(workdir / "m.json"), "--input",
                 str(workdir / "test.csv"), "--output", str(out)]) == 0
    rows = rows_of(out)
    assert list(rows[0]) == ["mu", "sigma", "point_prediction", "relative_std"]
    _, X, _ = read_csv(str(workdir / "test.csv"), "y")
    p = predict(load_model((workdir / "m.json").read_text()), X)
    assert len(rows) == len(X)
    assert np.array_equal([float(r["mu"]) for r in rows], p.mu)
    assert np.array_equal([float(r["sigma"]) for r in rows], np.exp(p.psi))
    # non-log model: point forecast is mu itself
    assert np.array_equal([float(r["point_prediction"]) for r in rows], p.mu)
    sig = np.array([float(r["sigma"]) for r in rows])
    assert np.allclose([float(r["relative_std"]) for r in rows], np.sqrt(np.expm1(sig ** 2)), rtol=1e-12)


def test_predict_zero_iteration_like_model(tmp_path):
    doc = ('{"format_version": 1, "eta": 0.3, "init_mu": 2.0, "init_psi": %r, '
           '"feature_names": ["a"], "iterations": []}' % float(0.5 * np.log(np.log(2.0))))
    (tmp_path / "m.json").write_text(doc)
    (tmp_path / "x.csv").write_text("a\n1\n2\n")
    assert main(["predict", "--model", str(tmp_path / "m.json"), "--input",
                 str(tmp_path / "x.csv"), "--output", str(tmp_path / "p.csv")]) == 0
    rows = rows_of(tmp_path / "p.csv")
    assert [float(r["mu"]) for r in rows] == [2.0, 2.0]
    assert [float(r["relative_std"]) for r in rows] == [1.0, 1.0]


def test_predict_schema_mismatch(workdir, tmp_path):
    (tmp_path / "bad.csv").write_text("x1,x2,zz\n1,2,3\n")
    code = main(["predict", "--model", str(workdir / "m.json"), "--input",
                 str(tmp_path / "bad.csv"), "--output", str(tmp_path / "p.csv")])
    assert code == 2


def test_parse_error_reports_location(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("x1,y\n1,2\n3,abc\n")
    code = main(["train", "--input", str(tmp_path / "bad.csv"), "--output", str(tmp_path / "m.json")])
    assert code == 2
    err = capsys.readouterr().err
    assert "row 3" in err and "'y'" in err


def test_log_transform_rejects_non_positive(tmp_path, capsys):
    lines = ["x1,y"] + [f"{i},{i + 1}" for i in range(40)] + ["40,0"]
    (tmp_path / "d.csv").write_text("\n".join(lines) + "\n")
    code = main(["train", "--input", str(tmp_path / "d.csv"), "--output",
                 str(tmp_path / "m.json"), "--log-transform"])
    assert code == 2
    assert "row 42" in capsys.readouterr().err


def test_evaluate_hetero(workdir, tmp_path):
    out = tmp_path / "e.csv"
    assert main(["evaluate", "--model", str(workdir / "m.json"), "--input",
                 str(workdir / "test.csv"), "--output", str(out), "--target-is-log"]) == 0
    rows = rows_of(out)
    buckets, overall = rows[:-1], rows[-1]
    assert len(buckets) == 10 and overall["bucket"] == "all"
    counts = np.array([int(r["count"]) for r in buckets])
    assert counts.sum() == 400
    for col in ("mape", "accuracy", "nll"):
        agg = (counts * np.array([float(r[col]) for r in buckets])).sum() / 400
        assert agg == pytest.approx(float(overall[col]), abs=1e-12)
    assert float(buckets[0]["accuracy"]) > float(buckets[-1]["accuracy"])


def test_evaluate_requires_original_scale(workdir, tmp_path):
    code = main(["evaluate", "--model", str(workdir / "m.json"), "--input",
                 str(workdir / "test.csv"), "--output", str(tmp_path / "e.csv")])
    assert code == 2


def test_log_model_perfect_forecast(tmp_path):
    # every row has the same target: the fitted median is exact
    lines = ["x1,y"] + [f"{i},8" for i in range(40)]
    (tmp_path / "d.csv").write_text("\n".join(lines) + "\n")
    m, e, p = (str(tmp_path / n) for n in ("m.json", "e.csv", "p.csv"))
    assert main(["train", "--input", str(tmp_path / "d.csv"), "--output", m,
                 "--log-transform", "--iterations", "5"]) == 0
    assert main(["evaluate", "--model", m, "--input", str(tmp_path / "d.csv"),
                 "--output", e, "--buckets", "4"]) == 0
    overall = rows_of(e)[-1]
    assert float(overall["mape"]) == pytest.approx(0.0, abs=1e-14)
    assert float(overall["accuracy"]) == 1.0
    assert main(["predict", "--model", m, "--input", str(tmp_path / "d.csv"), "--output", p]) == 0
    assert float(rows_of(p)[0]["point_prediction"]) == pytest.approx(8.0, rel=1e-14)


def test_importance_table(workdir, tmp_path):
    out = tmp_path / "i.csv"
    assert main(["importance", "--model", str(workdir / "m.json"), "--output", str(out),
                 "--alpha", "0.0"]) == 0
    rows = rows_of(out)
    assert len(rows) == 5
    assert rows[0]["feature"] == "x2"
    assert [int(r["rank"]) for r in rows] == [1, 2, 3, 4, 5]
    assert {"mean_gain", "variance_gain", "mean_weight", "variance_weight"} <= set(rows[0])
