import json

import jsonschema
import pytest

from hdp import experiments
from hdp.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from hdp.experiments import (
    COLUMNS,
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    ReportRecord,
    aggregate,
    report_schema,
    rows_from_csv,
    run,
    to_csv,
    to_json,
)

SMALL = {
    "jl": ({"n": 20, "N": 10}, 4),
    "sbm": ({"n": 40}, 4),
    "covariance": ({"n": 5, "N": 50}, 4),
    "completion": ({"n": 30, "m": 450.0}, 3),
    "width": ({"n": 10}, 200),
    "deviation": ({"n": 10, "points": 20, "m": 8, "width_draws": 500}, 4),
    "sparse": ({"n": 40, "s": 2, "m": 20}, 3),
    "bounds_audit": ({"N": 10, "grid": 5}, 500),
}


def small(name, **kw):
    params, trials = SMALL[name]
    return ExperimentConfig(name, dict(params), seed=kw.pop("seed", 7), trials=kw.pop("trials", trials), **kw)


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_run_and_schema(name):
    rec = run(small(name))
    assert rec.error is None
    assert rec.schema_version == "1.0"
    jsonschema.validate(json.loads(to_json(rec)), report_schema())


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_deterministic(name):
    a, b = run(small(name)).to_dict(), run(small(name)).to_dict()
    a.pop("wall_clock"), b.pop("wall_clock")
    assert a == b


@pytest.mark.parametrize("name", ["jl", "sbm", "covariance", "sparse", "deviation"])
def test_threads_match_serial(name):
    a = run(small(name, threads=1)).to_dict()
    b = run(small(name, threads=4)).to_dict()
    a.pop("wall_clock"), b.pop("wall_clock")
    assert a == b


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_csv_round_trip_reproduces_aggregates(name):
    rec = run(small(name))
    text = to_csv(rec)
    assert text.splitlines()[0] == ",".join(("trial",) + COLUMNS[name])
    rows = rows_from_csv(text)
    assert aggregate(name, rec.parameters, rows, rec.seed) == (rec.aggregate, rec.theory, rec.verdicts)


def test_json_round_trip_floats():
    rec = run(small("covariance"))
    back = json.loads(to_json(rec))
    assert back["aggregate"] == rec.aggregate
    assert [r["error"] for r in back["rows"]] == [r["error"] for r in rec.rows]


def test_empty_rows_header_only():
    rec = ReportRecord("jl", {}, 0, 1, [], {"count": 0}, {}, {})
    assert to_csv(rec) == "trial,m,max_expand,max_contract,success\n"


def test_jl_report_fields():
    rec = run(ExperimentConfig("jl", {"n": 50, "N": 100, "eps": 0.25, "C": 8}, seed=42, trials=5))
    assert "success_fraction" in rec.aggregate
    assert rec.theory["m_formula"] == 590


def test_sbm_histogram():
    rec = run(ExperimentConfig("sbm", {"n": 200, "p": 0.05, "q": 0.005}, seed=1, trials=5))
    assert sum(rec.aggregate["histogram_counts"]) == 5
    assert len(rec.aggregate["histogram_edges"]) == len(rec.aggregate["histogram_counts"]) + 1
    assert "recovery_condition" in rec.theory


def test_trials_zero_is_usage_error():
    with pytest.raises(ConfigError, match="trials"):
        ExperimentConfig("jl", {}, trials=0)


@pytest.mark.parametrize(
    "name,params,field",
    [
        ("jl", {"eps": 1.5}, "eps"),
        ("jl", {"nope": 1}, "nope"),
        ("sbm", {"n": 7}, "n"),
        ("sbm", {"p": 0.01, "q": 0.1}, "q"),
        ("jl", {"kind": "cauchy"}, "kind"),
        ("jl", {"n": 2.5}, "n"),
    ],
)
def test_schema_violation_names_field(name, params, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(name, params)
    assert info.value.field == field


def test_unknown_experiment():
    with pytest.raises(ConfigError, match="experiment"):
        ExperimentConfig("lasso", {})


def test_runtime_failure_gives_partial_report(monkeypatch):
    def boom(P, gen):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(experiments, "_trial_covariance", boom)
    rec = run(small("covariance"))
    assert rec.error.startswith("FloatingPointError")
    assert not rec.passed
    jsonschema.validate(json.loads(to_json(rec)), report_schema())


# ---- command line


def test_cli_json_out(tmp_path):
    out = tmp_path / "r.json"
    code = main(["covariance", "--n", "5", "--N", "50", "--trials", "3", "--seed", "2", "--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["parameters"]["N"] == 50 and doc["seed"] == 2


def test_cli_csv_stdout(capsys):
    assert main(["width", "--n", "5", "--trials", "100", "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("trial,sup,abs_sup\n")


def test_cli_config_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "jl", "parameters": {"n": 10, "N": 8, "eps": 0.5}, "seed": 3, "trials": 2}))
    out = tmp_path / "r.json"
    assert main(["jl", "--config", str(cfg), "--eps", "0.9", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["parameters"]["eps"] == 0.9 and doc["parameters"]["n"] == 10
    assert doc["seed"] == 3 and doc["trials"] == 2


def test_cli_config_experiment_mismatch(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "sbm"}))
    assert main(["jl", "--config", str(cfg)]) == EXIT_USAGE


def test_cli_usage_errors():
    assert main(["jl", "--trials", "0"]) == EXIT_USAGE
    assert main(["jl", "--eps", "3"]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["jl", "--bogus", "1"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_cli_io_errors(tmp_path):
    assert main(["jl", "--n", "5", "--N", "4", "--trials", "1", "--out", str(tmp_path / "no" / "r.json")]) == EXIT_IO
    assert main(["jl", "--config", str(tmp_path / "missing.json")]) == EXIT_IO


def test_cli_verdict_failure(tmp_path):
    # far too few dimensions for the distortion target
    code = main(["jl", "--n", "20", "--N", "30", "--m", "2", "--trials", "3", "--out", str(tmp_path / "r.json")])
    assert code == EXIT_FAIL


def test_env_threads_override(tmp_path, monkeypatch):
    monkeypatch.setenv("HDP_THREADS", "0")
    assert main(["jl", "--threads", "2", "--trials", "1"]) == EXIT_USAGE
    monkeypatch.setenv("HDP_THREADS", "3")
    out = tmp_path / "r.json"
    assert main(["jl", "--n", "8", "--N", "5", "--threads", "1", "--trials", "2", "--out", str(out)]) == EXIT_OK
