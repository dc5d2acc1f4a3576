"""Experiment configuration, the pre-built experiments and result persistence.

Every experiment returns a :class:`RunReport`.  ``report.json`` is
deterministic given ``(config, seed)``; wall-clock timings go to a separate
``timings.json`` so that reports can be diffed byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, FlrdError, ValidationError
from .estimation import (ContrastEvaluator, OptimizerConfig, WeightSymbol, config_hash, estimate_from_diagonal,
                         estimation_report)
from .models import SpectralModel, autocovariances, lrd_asymptote, model_from_config
from .simulation import SamplePath, SimConfig, derive_seed, simulate_gaussian
from .spectral import fdft, integrated_bias, periodogram

EXPERIMENTS = ("simulate", "estimate", "bias_decay", "cov_tail", "mc_consistency")


def load_fixtures() -> dict:
    """Versioned thresholds shipped with the package."""
    return json.loads(resources.files("flrd").joinpath("fixtures.json").read_text())


# --------------------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    experiment: str
    model: dict
    T: list
    R: int = 1
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "csv"
    threads: int = 1
    theta0: Optional[list] = None
    simulation: dict = field(default_factory=dict)
    estimation: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.fmt not in ("csv", "jsonl"):
            raise ConfigError(f"format must be 'csv' or 'jsonl', got {self.fmt!r}")
        if int(self.R) != self.R or self.R < 1:
            raise ConfigError("R must be an integer >= 1")
        if any(int(t) != t or t < 8 for t in self.T):
            raise ConfigError(f"T values must be integers >= 8, got {self.T}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        self.T = [int(t) for t in self.T]
        self.R, self.seed, self.threads = int(self.R), int(self.seed), int(self.threads)

    def hashable(self):
        """Fields that determine results (output location and threads excluded)."""
        return dict(experiment=self.experiment, model=self.model, T=self.T, R=self.R, seed=self.seed,
                    fmt=self.fmt, theta0=self.theta0, simulation=self.simulation, estimation=self.estimation,
                    params=self.params)

    @property
    def hash(self):
        return config_hash(self.hashable())

    def build_model(self) -> SpectralModel:
        return model_from_config(self.model)


_KNOWN = {"experiment", "model", "T", "R", "seed", "theta0", "simulation", "estimation", "params", "format"}


def config_from_dict(d: dict, experiment: Optional[str] = None, base_dir=None, **overrides) -> ExperimentConfig:
    """Validate a JSON-style experiment config; CLI values in ``overrides`` win.

    A string ``model`` is a path to a model config, relative to ``base_dir``.
    """
    if not isinstance(d, dict):
        raise ConfigError("experiment config must be a JSON object")
    experiment = experiment or d.get("experiment")
    if experiment is None:
        raise ConfigError("missing required field 'experiment'")
    experiment = experiment.replace("-", "_")
    if "model" not in d:
        raise ConfigError("missing required field 'model'")
    model = d["model"]
    if isinstance(model, str):
        if base_dir is not None and not Path(model).is_absolute():
            model = str(Path(base_dir) / model)
        try:
            with open(model) as fh:
                model = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read model config {model!r}: {exc}") from exc
    unknown = set(d) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    T = d.get("T", [])
    T = [T] if np.ndim(T) == 0 else list(T)
    if experiment not in ("cov_tail",) and not T:
        raise ConfigError("missing required field 'T'")
    vals = dict(experiment=experiment, model=model, T=T, R=d.get("R", 1), seed=d.get("seed", 0),
                fmt=d.get("format", "csv"), theta0=d.get("theta0"), simulation=d.get("simulation", {}),
                estimation=d.get("estimation", {}), params=d.get("params", {}))
    vals.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ExperimentConfig(**vals)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.build_model()  # surfaces model errors as ConfigError early
    return cfg


def load_config(path, experiment=None, **overrides) -> ExperimentConfig:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return config_from_dict(d, experiment, Path(path).parent, **overrides)


# --------------------------------------------------------------------------- report

@dataclass
class RunReport:
    """Metrics table, verdicts and timings of one experiment.

    Each verdict is ``{"criterion", "passed", "detail"}``; ``passed`` is
    ``None`` when the run is informational only (e.g. too few points).
    """

    experiment: str
    config_hash: str
    metrics: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def verdict(self, criterion, passed, detail=""):
        self.verdicts.append(dict(criterion=criterion, passed=None if passed is None else bool(passed),
                                  detail=detail))

    @property
    def passed(self) -> bool:
        return all(v["passed"] is not False for v in self.verdicts)

    def as_dict(self):
        return dict(experiment=self.experiment, config_hash=self.config_hash, metrics=self.metrics,
                    verdicts=self.verdicts, passed=self.passed, **self.extra)

    def write(self, out, fmt="csv", force=False):
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        rpath = out / "report.json"
        if rpath.exists() and not force:
            old = json.loads(rpath.read_text()).get("config_hash")
            if old != self.config_hash:
                raise ConfigError(f"{rpath} was written by config {old}; refusing to overwrite with {self.config_hash}")
        rpath.write_text(json.dumps(_clean(self.as_dict()), indent=2, sort_keys=True) + "\n")
        (out / "timings.json").write_text(json.dumps(self.timings, indent=2, sort_keys=True) + "\n")
        if self.metrics:
            write_table(out / f"metrics.{fmt}", self.metrics, fmt)
        return rpath


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_table(path, rows, fmt="csv"):
    rows = _clean(rows)
    if fmt == "csv":
        keys = list(rows[0])
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    else:
        with open(path, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")


def check_resume(out, cfg: ExperimentConfig):
    """Refuse to reuse an output directory written under a different config."""
    rpath = Path(out) / "report.json"
    if rpath.exists():
        old = json.loads(rpath.read_text()).get("config_hash")
        if old != cfg.hash:
            raise ConfigError(f"{rpath} belongs to config {old}, current config is {cfg.hash}")


# --------------------------------------------------------------------------- helpers

def _theta0(cfg, model):
    if cfg.theta0 is None:
        raise ConfigError("missing required field 'theta0'")
    try:
        return model.check_theta(cfg.theta0)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _sim_config(cfg, seed):
    try:
        return SimConfig(seed=seed, **cfg.simulation)
    except TypeError as exc:
        raise ConfigError(f"invalid simulation settings: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _weight(cfg, model):
    e = cfg.estimation
    wt = e.get("wtilde", [1.0] * model.L)
    return WeightSymbol(wt, e.get("beta", 2.0))


def _opt(cfg):
    e = cfg.estimation
    return OptimizerConfig(grid_points=e.get("grid_points", 21), refine=e.get("refine", True))


def strictly_decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


# --------------------------------------------------------------------------- experiments

def run_simulate(cfg: ExperimentConfig) -> RunReport:
    """Simulate one path of length ``T[0]`` and write it to ``cfg.out``."""
    t0 = time.perf_counter()
    model = cfg.build_model()
    theta0 = _theta0(cfg, model)
    path = simulate_gaussian(model, theta0, cfg.T[0], _sim_config(cfg, cfg.seed))
    rep = RunReport("simulate", cfg.hash)
    rep.extra["summary"] = dict(T=path.T, L=model.L, method=path.meta["method"], seed=cfg.seed)
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        data, side = path.save(Path(cfg.out) / "sample", cfg.fmt)
        rep.extra["files"] = [data.name, side.name]
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_estimate(cfg: ExperimentConfig) -> RunReport:
    """Estimate theta from ``params.data`` (a sample stem) or from a fresh simulation."""
    t0 = time.perf_counter()
    model = cfg.build_model()
    if "data" in cfg.params:
        path = SamplePath.load(cfg.params["data"])
        if path.basis.L != model.L:
            raise ConfigError(f"data has L={path.basis.L}, model has L={model.L}")
    else:
        path = simulate_gaussian(model, _theta0(cfg, model), cfg.T[0], _sim_config(cfg, cfg.seed))
    pset = periodogram(fdft(path))
    w = _weight(cfg, model)
    kernel = cfg.estimation.get("kernel")
    theta_hat, surface = estimate_from_diagonal(pset.diagonal(), pset.grid, model, w, _opt(cfg), kernel)
    rep = RunReport("estimate", cfg.hash)
    rep.extra["estimate"] = estimation_report(theta_hat, surface, model, pset.diagonal(), pset.grid, w, kernel,
                                              cfg.hash, cfg.seed)
    rep.metrics = [dict(theta=list(t), objective=float(s)) for t, s in zip(surface.thetas, surface.sups)]
    if cfg.theta0 is not None and "data" not in cfg.params:
        err = float(np.max(np.abs(theta_hat - np.asarray(cfg.theta0, dtype=float))))
        tol = cfg.params.get("tol", load_fixtures()["estimation"]["single_run_tol"])
        rep.verdict("theta_hat within single-run tolerance", err < tol, f"|theta_hat - theta0| = {err:.4g}, tol {tol}")
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_bias_decay(cfg: ExperimentConfig) -> RunReport:
    """Integrated periodogram bias against ``T`` (criterion 2)."""
    fx = load_fixtures()["bias_decay"]
    model = cfg.build_model()
    theta0 = _theta0(cfg, model)
    if cfg.T != sorted(cfg.T):
        raise ConfigError("bias_decay needs an ascending T list")
    rep = RunReport("bias_decay", cfg.hash)
    biases = []
    for T in cfg.T:
        t0 = time.perf_counter()
        b = integrated_bias(model, theta0, T)
        b_abs = integrated_bias(model, theta0, T, absolute=True)
        rep.timings[f"T={T}"] = time.perf_counter() - t0
        biases.append(b)
        rep.metrics.append(dict(T=T, integrated_bias=b, integrated_abs_bias=b_abs))
    ratio_max = cfg.params.get("ratio_max", fx["ratio_max"])
    name = "AC2 integrated periodogram bias decay"
    if max(biases) < 1e-8:
        rep.verdict(name, True, "all biases below 1e-8")
    elif len(biases) < 2:
        rep.verdict(name, None, "insufficient points")
    else:
        ratio = biases[-1] / biases[0]
        ok = strictly_decreasing(biases) and ratio < ratio_max
        rep.verdict(name, ok, f"strictly decreasing: {strictly_decreasing(biases)}; "
                              f"ratio {ratio:.4g} vs threshold {ratio_max}")
    return rep


def run_cov_tail(cfg: ExperimentConfig) -> RunReport:
    """Covariance tail against the long-range asymptote (criterion 3).

    ``params``: ``alphas`` (constant-family values), ``t`` (lags),
    ``tail_min``, ``rel_tol`` and ``method`` (covariance route).
    """
    fx = load_fixtures()["cov_tail"]
    model = cfg.build_model()
    p = cfg.params
    lags = [int(t) for t in p.get("t", [200, 300, 400])]
    if max(lags) < 200:
        raise ConfigError("cov_tail needs a lag list reaching at least 200")
    alphas = p.get("alphas")
    thetas = [[a] for a in alphas] if alphas is not None else [_theta0(cfg, model).tolist()]
    tail_min = p.get("tail_min", fx["tail_min"])
    tol = p.get("rel_tol", fx["rel_tol"])
    floor = fx["amplitude_floor"]
    rep = RunReport("cov_tail", cfg.hash)
    worst = 0.0
    t0 = time.perf_counter()
    for th in thetas:
        try:
            r = autocovariances(model, th, max(lags), method=p.get("method", "auto"))
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
        for i, l in enumerate(model.basis.indices()):
            for t in lags:
                asym = lrd_asymptote(model, t, int(l), th)
                if abs(asym) >= floor:
                    ratio = r[t, i] / asym
                else:
                    ratio = 1.0 if abs(r[t, i]) < floor else math.inf
                if t >= tail_min:
                    worst = max(worst, abs(ratio - 1.0))
                rep.metrics.append(dict(theta=list(th), l=int(l), t=t, r_t=float(r[t, i]), asymptote=asym,
                                        ratio=float(ratio)))
    rep.timings["total_s"] = time.perf_counter() - t0
    rep.verdict("AC3 covariance tail matches LRD asymptote", worst < tol,
                f"max |ratio - 1| over t >= {tail_min}: {worst:.4g}, tolerance {tol}")
    return rep


def _mc_replicate(args):
    model, theta0, T, seed, sim_kw, w, opt, kernel = args
    try:
        path = simulate_gaussian(model, theta0, T, SimConfig(seed=seed, **sim_kw), validate=False)
        pset = periodogram(fdft(path))
        th, _ = estimate_from_diagonal(pset.diagonal(), pset.grid, model, w, opt, kernel,
                                       evaluator=_evaluator(model, w, kernel))
        return th.tolist(), None
    except FlrdError as exc:
        return None, f"{type(exc).__name__}: {exc}"


_EVALUATORS = {}


def _evaluator(model, w, kernel):
    key = (id(model), id(w), kernel)
    ev = _EVALUATORS.get(key)
    if ev is None or ev.model is not model or ev.w is not w:
        _EVALUATORS.clear()
        ev = _EVALUATORS[key] = ContrastEvaluator(model, w, kernel=kernel)
    return ev


def replicate_seed(seed, T, r):
    return derive_seed(derive_seed(seed, T), r)


def run_mc_consistency(cfg: ExperimentConfig) -> RunReport:
    """Monte Carlo consistency of the estimator (criterion 6)."""
    fx = load_fixtures()["mc_consistency"]
    model = cfg.build_model()
    theta0 = _theta0(cfg, model)
    if len(cfg.T) < 3:
        raise ConfigError("mc_consistency needs at least three T values")
    dom = model.theta_domain
    rep = RunReport("mc_consistency", cfg.hash)
    if np.any(np.isclose(theta0, dom[:, 0])) or np.any(np.isclose(theta0, dom[:, 1])):
        msg = "theta0 lies on the domain boundary; the argmin may clip"
        warnings.warn(msg)
        rep.extra["warnings"] = [msg]
    w, opt, kernel = _weight(cfg, model), _opt(cfg), cfg.estimation.get("kernel")
    _sim_config(cfg, 0)
    jobs = [(model, theta0, T, replicate_seed(cfg.seed, T, r), dict(cfg.simulation), w, opt, kernel)
            for T in cfg.T for r in range(cfg.R)]
    t0 = time.perf_counter()
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(_mc_replicate, jobs, chunksize=max(1, len(jobs) // (4 * cfg.threads))))
    else:
        results = [_mc_replicate(j) for j in jobs]
    rep.timings["total_s"] = time.perf_counter() - t0

    replicates, medians = [], []
    for k, T in enumerate(cfg.T):
        errs, failed = [], 0
        for r in range(cfg.R):
            th, err_msg = results[k * cfg.R + r]
            if th is None:
                failed += 1
                replicates.append(dict(T=T, replicate=r, theta_hat=None, abs_error=None, error=err_msg))
                continue
            e = float(np.max(np.abs(np.asarray(th) - theta0)))
            errs.append(e)
            replicates.append(dict(T=T, replicate=r, theta_hat=th, abs_error=e, error=None))
        if failed > fx["max_failed_fraction"] * cfg.R:
            raise FlrdError(f"{failed} of {cfg.R} replicates failed at T={T}")
        q25, med, q75 = (np.percentile(errs, [25, 50, 75]) if errs else (math.nan,) * 3)
        medians.append(float(med))
        rep.metrics.append(dict(T=T, median_abs_error=float(med), iqr=float(q75 - q25), n_ok=len(errs),
                                n_failed=failed))
    rep.extra["replicates"] = replicates
    name = "AC6 estimator consistency"
    if cfg.R < fx["min_replicates"]:
        rep.verdict(name, None, "insufficient replicates")
    else:
        rep.verdict(name + ": medians strictly decrease", strictly_decreasing(medians),
                    "medians " + ", ".join(f"{m:.4g}" for m in medians))
        limit = cfg.params.get("final_median_max")
        if limit is not None:
            rep.verdict(name + ": final median below limit", medians[-1] < limit,
                        f"median at T={cfg.T[-1]} is {medians[-1]:.4g}, limit {limit}")
    return rep


RUNNERS = dict(simulate=run_simulate, estimate=run_estimate, bias_decay=run_bias_decay, cov_tail=run_cov_tail,
               mc_consistency=run_mc_consistency)


def run(cfg: ExperimentConfig, force=False) -> RunReport:
    if cfg.out and not force:
        check_resume(cfg.out, cfg)
    rep = RUNNERS[cfg.experiment](cfg)
    if cfg.out:
        rep.write(cfg.out, cfg.fmt, force=force)
        if cfg.experiment == "mc_consistency":
            write_table(Path(cfg.out) / f"replicates.{cfg.fmt}", rep.extra["replicates"], cfg.fmt)
    return rep
