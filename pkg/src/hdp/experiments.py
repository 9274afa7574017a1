"""Declarative experiment configs, seeded trial runners and report records.

Every experiment is a list of independent trials. Trial ``i`` draws from
the stream ``RngStream(seed).child(i)``, so results do not depend on the
number of worker threads. Aggregates are pure functions of the per-trial
rows, which is what makes CSV round trips reproduce them exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bounds, completion, estimation, geometry, jl, networks, recovery
from .ensembles import KINDS, EnsembleSpec, RngStream, sample_matrix

SCHEMA_VERSION = "1.0"
EXPERIMENTS = ("jl", "sbm", "covariance", "completion", "width", "deviation", "sparse", "bounds_audit")


class ConfigError(ValueError):
    """A config or flag failed validation; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class Param:
    type: type
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    help: str = ""
    choices: tuple | None = None


def _pos(v):
    return v > 0


def _prob(v):
    return 0 <= v <= 1


SCHEMAS: dict[str, dict[str, Param]] = {
    "jl": {
        "n": Param(int, 50, _pos, "ambient dimension"),
        "N": Param(int, 100, lambda v: v >= 2, "number of points"),
        "eps": Param(float, 0.25, lambda v: 0 < v <= 1, "distortion target"),
        "C": Param(float, jl.DEFAULT_C_JL, _pos, "constant in m = C eps^-2 ln N"),
        "m": Param(int, 0, lambda v: v >= 0, "target dimension override (0 = formula)"),
        "kind": Param(str, "gaussian", choices=KINDS),
        "target": Param(float, 0.99, _prob, "required success fraction"),
    },
    "sbm": {
        "n": Param(int, 200, lambda v: v >= 4 and v % 2 == 0, "vertices (even)"),
        "p": Param(float, 0.05, _prob, "within-community edge probability"),
        "q": Param(float, 0.005, _prob, "across-community edge probability"),
        "C": Param(float, networks.DEFAULT_C_CONC, _pos, "concentration constant"),
        "threshold": Param(float, 0.15, _prob, "misclassification counted as success"),
        "target": Param(float, 0.9, _prob, "required success fraction"),
        "bins": Param(int, 10, _pos, "histogram bins over [0, 0.5]"),
    },
    "covariance": {
        "n": Param(int, 20, lambda v: v >= 2, "dimension"),
        "N": Param(int, 400, _pos, "sample size"),
        "spectrum": Param(str, "identity", choices=("identity", "spiked"), help="identity or diag(1, 0.01, ...)"),
        "kind": Param(str, "gaussian", choices=KINDS),
        "C": Param(float, 2.0, _pos, "constant for the sub-gaussian bound verdict"),
    },
    "completion": {
        "n": Param(int, 100, lambda v: v >= 2, "matrix size"),
        "r": Param(int, 2, _pos, "rank"),
        "m": Param(float, 5000.0, _pos, "expected number of observed entries"),
        "C": Param(float, 1.0, _pos, "theory constant"),
        "target": Param(float, 0.9, _prob, "required fraction under the bound"),
    },
    "width": {
        "set": Param(str, "l2", choices=("l1", "l2", "linf", "finite"), help="l_p unit ball or random finite set"),
        "n": Param(int, 100, _pos, "dimension"),
        "points": Param(int, 100, _pos, "size of the random finite set"),
    },
    "deviation": {
        "n": Param(int, 100, _pos, "dimension"),
        "points": Param(int, 100, _pos, "number of random unit vectors in T"),
        "m": Param(int, 50, _pos, "rows of A"),
        "kind": Param(str, "gaussian", choices=KINDS),
        "C": Param(float, 4.0, _pos, "deviation constant (applied to gamma(T))"),
        "width_draws": Param(int, 20000, lambda v: v >= 100, "draws for the gamma(T) estimate"),
    },
    "sparse": {
        "n": Param(int, 200, lambda v: v >= 2, "signal dimension"),
        "s": Param(int, 5, lambda v: v >= 0, "sparsity"),
        "m": Param(int, 150, _pos, "measurements"),
        "kind": Param(str, "gaussian", choices=KINDS),
        "C": Param(float, 1.0, _pos, "theory constant"),
    },
    "bounds_audit": {
        "family": Param(str, "hoeffding", choices=("hoeffding", "matrix_bernstein")),
        "N": Param(int, 20, _pos, "number of summands"),
        "dim": Param(int, 10, lambda v: v >= 2, "matrix dimension (matrix_bernstein)"),
        "grid": Param(int, 20, lambda v: v >= 2, "grid points over [0, 4 std]"),
        "c": Param(float, bounds.DEFAULT_C_SMALL, _pos, "Hoeffding constant"),
    },
}

# fixed CSV column order per experiment (after the leading "trial" column)
COLUMNS: dict[str, tuple[str, ...]] = {
    "jl": ("m", "max_expand", "max_contract", "success"),
    "sbm": ("misclassification", "success", "deviation", "deviation_ratio"),
    "covariance": ("error",),
    "completion": ("rmse", "bound", "under_bound", "op_error", "rescaled_op_error"),
    "width": ("sup", "abs_sup"),
    "deviation": ("deviation", "square_deviation"),
    "sparse": ("error", "exact", "certified", "iterations"),
    "bounds_audit": ("t", "p_hat", "upper_conf", "bound", "margin"),
}


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    trials: int = 10
    output_path: str | None = None
    threads: int = 1

    def __post_init__(self):
        self.parameters = validate(self.experiment, self.parameters)
        if not isinstance(self.trials, int) or isinstance(self.trials, bool) or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be a 64-bit non-negative integer, got {self.seed!r}")

    @classmethod
    def from_json(cls, text: str, **overrides) -> "ExperimentConfig":
        doc = json.loads(text)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


def validate(experiment: str, parameters: dict) -> dict:
    if experiment not in SCHEMAS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    schema = SCHEMAS[experiment]
    unknown = set(parameters) - set(schema)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown parameter for {experiment}")
    out = {}
    for name, spec in schema.items():
        raw = parameters.get(name, spec.default)
        try:
            if spec.type is int and isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            value = spec.type(raw)
        except (TypeError, ValueError):
            raise ConfigError(name, f"expected {spec.type.__name__}, got {raw!r}") from None
        if spec.choices is not None and value not in spec.choices:
            raise ConfigError(name, f"must be one of {spec.choices}, got {value!r}")
        if not spec.check(value):
            raise ConfigError(name, f"value {value!r} out of range")
        out[name] = value
    if experiment == "sbm" and out["q"] > out["p"]:
        raise ConfigError("q", "must not exceed p")
    if experiment == "sparse" and out["s"] > out["m"]:
        raise ConfigError("s", "must not exceed m")
    if experiment == "completion" and out["r"] > out["n"]:
        raise ConfigError("r", "must not exceed n")
    return out


@dataclass
class ReportRecord:
    experiment: str
    parameters: dict
    seed: int
    trials: int
    rows: list
    aggregate: dict
    theory: dict
    verdicts: dict
    wall_clock: float = 0.0
    error: str | None = None
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "parameters": self.parameters,
            "seed": self.seed,
            "trials": self.trials,
            "rows": self.rows,
            "aggregate": self.aggregate,
            "theory": self.theory,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "wall_clock": self.wall_clock,
            "error": self.error,
        }


def _mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def _summary(rows, key) -> dict:
    mean, se = _mean_stderr([r[key] for r in rows])
    return {f"{key}_mean": mean, f"{key}_stderr": se}


# ---------------------------------------------------------------- trials


def _trial_jl(P, gen):
    cfg = jl.JLConfig(P["eps"], P["n"], P["N"], P["C"], P["kind"])
    m = P["m"] or jl.choose_target_dim(cfg)
    rep = jl.jl_trial(cfg, m, gen)
    return {"m": m, "max_expand": rep.max_expand, "max_contract": rep.max_contract, "success": int(rep.within(P["eps"]))}


def _trial_sbm(P, gen):
    params = networks.SBMParams(P["n"], P["p"], P["q"])
    A, labels, _ = networks.sample_sbm(params, gen)
    mis = networks.misclassification_rate(networks.spectral_cluster(A), labels)
    dev = float(np.linalg.norm(A - networks.expected_adjacency(params), 2))
    return {
        "misclassification": mis,
        "success": int(mis <= P["threshold"]),
        "deviation": dev,
        "deviation_ratio": dev / networks.concentration_scale(params),
    }


def _covariance_model(P):
    if P["spectrum"] == "identity":
        sigma = np.eye(P["n"])
    else:
        sigma = np.diag(np.r_[1.0, np.full(P["n"] - 1, 0.01)])
    return estimation.CovarianceModel(sigma, P["kind"])


def _trial_covariance(P, gen):
    model = _covariance_model(P)
    S = estimation.sample_covariance(model.sample(P["N"], gen))
    return {"error": float(np.linalg.norm(S - model.sigma, 2))}


def _trial_completion(P, gen):
    X = completion.low_rank_generator(P["n"], P["r"], gen)
    res = completion.CompletionInstance(X, P["r"], P["m"]).run(gen, C=P["C"])
    return {
        "rmse": res.per_entry_rmse,
        "bound": res.theory_bound,
        "under_bound": int(res.per_entry_rmse <= res.theory_bound),
        "op_error": res.op_error,
        "rescaled_op_error": res.rescaled_op_error,
    }


def _width_set(P, seed):
    n = P["n"]
    if P["set"] == "finite":
        pts = geometry.random_unit_vectors(P["points"], n, RngStream(seed, 1).generator())
        return geometry.FiniteSet(pts)
    p = {"l1": 1, "l2": 2, "linf": np.inf}[P["set"]]
    return geometry.LpBall(p, n)


def _deviation_set(P, seed):
    return geometry.FiniteSet(geometry.random_unit_vectors(P["points"], P["n"], RngStream(seed, 1).generator()))


def _trial_deviation(P, gen, T):
    A = sample_matrix(EnsembleSpec(P["kind"], P["n"]), P["m"], gen)
    dev, sq = geometry.deviation_statistics(A, T.points)
    return {"deviation": dev, "square_deviation": sq}


def _trial_sparse(P, gen):
    m = min(P["m"], P["n"] - 1)
    x = recovery.sparse_signal(P["n"], P["s"], gen)
    A = sample_matrix(EnsembleSpec(P["kind"], P["n"]), m, gen)
    sol = recovery.basis_pursuit(A, A @ x)
    err = float(np.linalg.norm(sol.x_hat - x))
    cert = recovery.check_certificate(A, A @ x, sol)
    return {
        "error": err,
        "exact": int(err <= 1e-6),
        "certified": int(sol.status == "optimal" and cert.valid),
        "iterations": sol.iterations,
    }


def _run_trials(fn, trials, seed, threads):
    root = RngStream(seed)

    def one(i):
        return fn(root.child(i).generator())

    if threads <= 1:
        return [one(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(trials)))


# ---------------------------------------------------------------- aggregates


def aggregate(experiment: str, parameters: dict, rows: list, seed: int = 0) -> tuple[dict, dict, dict]:
    """Return ``(aggregate, theory, verdicts)`` from ``rows``, the parameters and the seed."""
    P = parameters
    agg: dict = {"count": len(rows)}
    theory: dict = {}
    verdicts: dict = {}
    if experiment == "jl":
        cfg = jl.JLConfig(P["eps"], P["n"], P["N"], P["C"], P["kind"])
        theory["m_formula"] = jl.choose_target_dim(cfg)
        if rows:
            agg["success_fraction"] = float(np.mean([r["success"] for r in rows]))
            agg.update(_summary(rows, "max_expand"))
            agg.update(_summary(rows, "max_contract"))
            verdicts["success_fraction>=target"] = agg["success_fraction"] >= P["target"]
    elif experiment == "sbm":
        params = networks.SBMParams(P["n"], P["p"], P["q"])
        (l1, _), (l2, _) = networks.block_spectrum(params)
        theory.update(
            recovery_condition=params.recovery_condition(),
            concentration_scale=networks.concentration_scale(params),
            concentration_bound=P["C"] * networks.concentration_scale(params),
            lambda1=l1,
            lambda2=l2,
            expected_degree=params.d,
        )
        if rows:
            mis = np.array([r["misclassification"] for r in rows])
            counts, edges = np.histogram(mis, bins=P["bins"], range=(0.0, 0.5))
            agg.update(_summary(rows, "misclassification"))
            agg.update(_summary(rows, "deviation"))
            agg["success_fraction"] = float(np.mean([r["success"] for r in rows]))
            agg["histogram_counts"] = counts.tolist()
            agg["histogram_edges"] = edges.tolist()
            verdicts["success_fraction>=target"] = agg["success_fraction"] >= P["target"]
            verdicts["mean_deviation<=bound"] = agg["deviation_mean"] <= theory["concentration_bound"]
    elif experiment == "covariance":
        model = _covariance_model(P)
        sg = estimation.theory_bound_subgaussian(model, P["N"])
        theory.update(
            general=estimation.theory_bound_general(model, P["N"]),
            subgaussian_n=sg.n_based,
            subgaussian_r=sg.r_based,
            effective_rank=sg.effective_rank,
        )
        if rows:
            agg.update(_summary(rows, "error"))
            agg["scaled_error"] = agg["error_mean"] * math.sqrt(P["N"])
            verdicts["mean_error<=C*subgaussian_r"] = agg["error_mean"] <= P["C"] * sg.r_based
    elif experiment == "completion":
        theory["bound"] = completion.theory_bound(P["n"], P["r"], P["m"], 1.0, P["C"])
        theory["p"] = P["m"] / P["n"] ** 2
        if rows:
            agg.update(_summary(rows, "rmse"))
            agg["under_bound_fraction"] = float(np.mean([r["under_bound"] for r in rows]))
            agg["operator_bridge_ok"] = all(r["op_error"] <= 2 * r["rescaled_op_error"] + 1e-9 for r in rows)
            verdicts["under_bound_fraction>=target"] = agg["under_bound_fraction"] >= P["target"]
    elif experiment == "width":
        n = P["n"]
        if rows:
            agg["width"], agg["width_stderr"] = _mean_stderr([r["sup"] for r in rows])
            agg["complexity"], agg["complexity_stderr"] = _mean_stderr([r["abs_sup"] for r in rows])
        if P["set"] == "l2":
            theory["sqrt_n"] = math.sqrt(n)
            if rows:
                verdicts["complexity/sqrt(n) in [0.9,1.05]"] = 0.9 <= agg["complexity"] / math.sqrt(n) <= 1.05
        elif P["set"] == "l1":
            theory["sqrt_2_ln_n"] = math.sqrt(2 * math.log(n)) if n > 1 else 0.0
            if rows and n > 1:
                verdicts["complexity/sqrt(2 ln n) in [0.7,1.3]"] = 0.7 <= agg["complexity"] / theory["sqrt_2_ln_n"] <= 1.3
        elif P["set"] == "finite":
            theory["envelope"] = math.sqrt(2 * math.log(2 * P["points"]))
            if rows:
                verdicts["complexity<=envelope"] = agg["complexity"] - 3 * agg["complexity_stderr"] <= theory["envelope"]
    elif experiment == "deviation":
        if rows:
            agg.update(_summary(rows, "deviation"))
            agg.update(_summary(rows, "square_deviation"))
            T = _deviation_set(P, seed)
            gamma = geometry.gaussian_complexity_mc(T, P["width_draws"], RngStream(seed, 2).generator())
            theory.update(gamma=gamma.mean, gamma_stderr=gamma.stderr, bound=P["C"] * gamma.mean)
            verdicts["mean_deviation<=C*gamma"] = agg["deviation_mean"] <= theory["bound"]
    elif experiment == "sparse":
        m = min(P["m"], P["n"] - 1)
        theory["m_used"] = m
        theory["bound"] = P["C"] * math.sqrt(P["s"] * math.log(P["n"]) / m) if P["s"] else 0.0
        if rows:
            agg.update(_summary(rows, "error"))
            agg["exact_fraction"] = float(np.mean([r["exact"] for r in rows]))
            agg["certified_fraction"] = float(np.mean([r["certified"] for r in rows]))
            verdicts["mean_error<=bound"] = agg["error_mean"] <= theory["bound"] + 1e-12
            verdicts["all_certified"] = agg["certified_fraction"] == 1.0
    elif experiment == "bounds_audit":
        if rows:
            margins = [r["margin"] for r in rows]
            worst = int(np.argmin(margins))
            agg["worst_margin"] = float(margins[worst])
            agg["worst_t"] = float(rows[worst]["t"])
            agg["violations"] = int(sum(mg < 0 for mg in margins))
            verdicts["bound_dominates"] = agg["violations"] == 0
    return agg, theory, verdicts


# ---------------------------------------------------------------- dispatch


def _bounds_rows(P, trials, seed):
    gen = RngStream(seed).child(0).generator()
    if P["family"] == "hoeffding":
        N = P["N"]
        std = math.sqrt(N)
        psi2 = 1.0 / math.sqrt(math.log(2.0))
        tb = bounds.TailBound("hoeffding", bounds.BoundParams(psi2_norms=[psi2] * N, c_const=P["c"]))
        sampler = bounds.rademacher_sum_sampler(N)
    else:
        n, N = P["dim"], P["N"]
        sigma2 = bounds.sign_pair_variance(n, N)
        std = math.sqrt(sigma2)
        tb = bounds.TailBound("matrix_bernstein", bounds.BoundParams(sigma2=sigma2, K=1.0, dim_n=n))
        sampler = bounds.sign_pair_norm_sampler(n, N)
    grid = np.linspace(0.0, 4.0 * std, P["grid"])
    rep = bounds.bound_audit(tb, sampler, grid, trials, gen)
    return [
        {"t": float(t), "p_hat": float(ph), "upper_conf": float(up), "bound": float(b), "margin": float(b - up)}
        for t, ph, up, b in zip(rep.tail.t, rep.tail.p_hat, rep.tail.upper_conf, rep.bound_values)
    ]


def run(config: ExperimentConfig) -> ReportRecord:
    """Run an experiment; deterministic in ``(config, seed)`` apart from wall clock."""
    P, exp = config.parameters, config.experiment
    start = time.perf_counter()
    rows: list = []
    error = None
    try:
        if exp == "bounds_audit":
            if config.trials < 100:
                raise ConfigError("trials", "bounds_audit needs at least 100 trials")
            rows = _bounds_rows(P, config.trials, config.seed)
        elif exp == "width":
            T = _width_set(P, config.seed)
            gen = RngStream(config.seed).child(0).generator()
            g = gen.standard_normal((config.trials, T.n))
            up, down = T.support(g), T.support(-g)
            rows = [{"sup": float(a), "abs_sup": float(max(a, b))} for a, b in zip(up, down)]
        elif exp == "deviation":
            T = _deviation_set(P, config.seed)
            rows = _run_trials(lambda gen: _trial_deviation(P, gen, T), config.trials, config.seed, config.threads)
        else:
            fn = {
                "jl": _trial_jl,
                "sbm": _trial_sbm,
                "covariance": _trial_covariance,
                "completion": _trial_completion,
                "sparse": _trial_sparse,
            }[exp]
            rows = _run_trials(lambda gen: fn(P, gen), config.trials, config.seed, config.threads)
    except ConfigError:
        raise
    except Exception as exc:  # the partial report carries the failure
        error = f"{type(exc).__name__}: {exc}"
    agg, theory, verdicts = aggregate(exp, P, rows, config.seed)
    return ReportRecord(
        experiment=exp,
        parameters=dict(P),
        seed=config.seed,
        trials=config.trials,
        rows=rows,
        aggregate=agg,
        theory=theory,
        verdicts=verdicts,
        wall_clock=time.perf_counter() - start,
        error=error,
    )


# ---------------------------------------------------------------- emission


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def to_csv(record: ReportRecord) -> str:
    """Per-trial rows with the documented fixed header; header only if no rows."""
    cols = COLUMNS[record.experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("trial",) + cols)
    for i, row in enumerate(record.rows):
        w.writerow([str(i)] + [_fmt(row[c]) for c in cols])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        row = {}
        for k, v in rec.items():
            if k == "trial":
                continue
            row[k] = int(v) if v.lstrip("-").isdigit() else float(v)
        rows.append(row)
    return rows


def to_json(record: ReportRecord) -> str:
    # Python's float repr is the shortest string that round-trips exactly
    return json.dumps(record.to_dict(), indent=2, default=_json_default, allow_nan=True)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def emit(record: ReportRecord, path, fmt: str = "json") -> Path:
    if fmt not in ("csv", "json"):
        raise ConfigError("format", f"must be csv or json, got {fmt!r}")
    text = to_csv(record) if fmt == "csv" else to_json(record)
    path = Path(path)
    path.write_text(text)
    return path


def report_schema() -> dict:
    return json.loads(resources.files("hdp").joinpath("report_schema.json").read_text())
