"""Experiment protocol: simulate, fit, forecast and score over many seeds."""

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from latentode.differentiation import differentiate
from latentode.dictionary import build_features
from latentode.dynamics import SystemSpec, integrate, sample_initial_conditions
from latentode.errors import InvalidArgument, LatentOdeError
from latentode.lasso import LassoConfig, coefficient_mse, fit_cv
from latentode.metrics import DIVERGED_PENALTY, smape, smape_terms  # noqa: F401
from latentode.model import SparseOdeModel, forecast_system

__all__ = [
    "ExperimentConfig", "ExperimentResult", "PRESETS", "naive_forecast", "preset",
    "run_experiment", "smape", "smape_terms", "true_coefficients",
]


def naive_forecast(series, window: int, horizons) -> np.ndarray:
    """Predict the mean of the last ``window`` points at every horizon."""
    x = np.asarray(series, dtype=float)
    if window < 1:
        raise InvalidArgument("window must be positive")
    if x.shape[0] < window:
        raise InvalidArgument(f"series of length {x.shape[0]} shorter than window {window}")
    return np.full(len(horizons), math.fsum(x[-window:]) / window)


def true_coefficients(system: SystemSpec, observed: Sequence[str], target_order: int):
    """Known right-hand sides as ``{label: coefficient}``, one per observed channel.

    Covers the fully observed systems at order 1 and the oscillator with one
    channel observed at order 2, where eliminating the hidden channel gives
    ``f'' = (a + d) f' - (ad - bc) f``. Returns None otherwise.
    """
    p = system.params
    observed = tuple(observed)
    if observed == system.channel_names and target_order == 1:
        if system.kind == "oscillator":
            return [{"x": p["a"], "y": p["b"]}, {"x": p["c"], "y": p["d"]}]
        if system.kind == "rossler":
            return [{"y": -1.0, "z": -1.0}, {"x": 1.0, "y": p["a"]},
                    {"1": p["b"], "z": -p["c"], "x * z": 1.0}]
        return [{"x": -p["sigma"], "y": p["sigma"]},
                {"x": p["rho"], "y": -1.0, "x * z": -1.0},
                {"x * y": 1.0, "z": -p["beta"]}]
    if system.kind == "oscillator" and len(observed) == 1 and target_order == 2:
        trace = p["a"] + p["d"]
        det = p["a"] * p["d"] - p["b"] * p["c"]
        ch = observed[0]
        return [{ch: -det, ch + "'": trace}]
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec
    observed: tuple = ("x",)
    n_seeds: int = 20
    series_length: int = 5000
    dt: float = 0.01
    target_orders: tuple = (1, 2, 3)
    max_degree: int = 3
    horizons: np.ndarray = field(default_factory=lambda: np.arange(1, 201))
    lasso: LassoConfig = LassoConfig()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "observed", tuple(self.observed))
        object.__setattr__(self, "target_orders", tuple(int(n) for n in self.target_orders))
        object.__setattr__(self, "horizons", np.asarray(self.horizons, dtype=np.int64))
        unknown = set(self.observed) - set(self.system.channel_names)
        if not self.observed or unknown:
            raise InvalidArgument(f"observed channels must be among {self.system.channel_names}")
        if self.n_seeds < 1 or self.max_degree < 0 or not self.target_orders:
            raise InvalidArgument("n_seeds, max_degree and target_orders must be set")
        if not self.dt > 0:
            raise InvalidArgument("dt must be positive")
        if self.horizons.size == 0 or self.horizons[0] < 1 or np.any(np.diff(self.horizons) <= 0):
            raise InvalidArgument("horizons must be positive and strictly ascending")
        if self.train_length <= 2 * max(self.target_orders) + 1:
            raise InvalidArgument("series too short for the requested target orders")

    @property
    def train_length(self) -> int:
        return self.series_length - int(self.horizons[-1])


@dataclass
class OrderResult:
    """One seed, one target order: fitted models, reports and scores."""

    target_order: int
    models: list
    reports: dict
    fit_time_seconds: float
    smape_by_horizon: np.ndarray
    coef_mse: float | None = None
    error: str | None = None

    @property
    def diverged(self) -> bool:
        return any(r.diverged_at is not None for r in self.reports.values())


@dataclass
class SeedResult:
    index: int
    x0: np.ndarray
    orders: dict


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    per_seed: list

    def _collect(self, order, attr):
        return [getattr(s.orders[order], attr) for s in self.per_seed]

    def mean_smape_by_horizon(self, order: int) -> np.ndarray:
        curves = np.array(self._collect(order, "smape_by_horizon"))
        return np.array([math.fsum(col) / len(col) for col in curves.T])

    def mean_fit_time(self, order: int) -> float:
        t = self._collect(order, "fit_time_seconds")
        return math.fsum(t) / len(t)

    def mean_coef_mse(self, order: int) -> float | None:
        vals = self._collect(order, "coef_mse")
        if any(v is None for v in vals):
            return None
        return math.fsum(vals) / len(vals)

    def mean_coefficients(self, order: int, channel=None) -> dict:
        """Average fitted coefficient per label (constant term includes the intercept)."""
        maps = []
        for s in self.per_seed:
            models = s.orders[order].models
            m = models[0] if channel is None else next(x for x in models if x.target == channel)
            maps.append(m.coefficient_map())
        labels = list(maps[0])
        return {k: math.fsum(d[k] for d in maps) / len(maps) for k in labels}

    def to_dict(self, timing: bool = True) -> dict:
        cfg = self.config
        out = {
            "system": cfg.system.kind,
            "params": dict(cfg.system.params),
            "observed": list(cfg.observed),
            "n_seeds": cfg.n_seeds,
            "series_length": cfg.series_length,
            "dt": cfg.dt,
            "max_degree": cfg.max_degree,
            "horizons": cfg.horizons.tolist(),
            "seed": cfg.seed,
            "orders": {},
        }
        for n in cfg.target_orders:
            out["orders"][str(n)] = {
                "mean_smape_by_horizon": self.mean_smape_by_horizon(n).tolist(),
                "mean_fit_time": self.mean_fit_time(n) if timing else None,
                "mean_coef_mse": self.mean_coef_mse(n),
                "seeds": [_order_summary(s.orders[n], timing) for s in self.per_seed],
            }
        return out

    def csv_rows(self, timing: bool = True):
        yield ("seed", "target_order", "horizon", "smape", "fit_time")
        for s in self.per_seed:
            for n in self.config.target_orders:
                r = s.orders[n]
                ft = repr(r.fit_time_seconds) if timing else ""
                for h, v in zip(self.config.horizons, r.smape_by_horizon):
                    yield (str(s.index), str(n), str(int(h)), repr(float(v)), ft)


def _order_summary(r: OrderResult, timing: bool) -> dict:
    return {
        "models": [m.to_dict() for m in r.models],
        "fit_time_seconds": r.fit_time_seconds if timing else None,
        "diverged_at": {ch: rep.diverged_at for ch, rep in r.reports.items()},
        "smape_by_horizon": r.smape_by_horizon.tolist(),
        "coef_mse": r.coef_mse,
        "error": r.error,
    }


def fit_models(series: dict, dt: float, target_order: int, max_degree: int,
               lasso: LassoConfig = LassoConfig()):
    """Fit one model per observed channel.

    ``series`` maps channel name to samples. A single channel gets the
    dictionary over ``f`` and its derivatives; several channels share a
    dictionary over all of them. Returns ``(models, stacks, fit_seconds)``
    where the stacks are keyed by the models' channel names.
    """
    names = tuple(series)
    stacks = {ch: differentiate(v, dt, target_order) for ch, v in series.items()}
    models = []
    elapsed = 0.0
    for ch in names:
        if len(names) == 1:
            feats = build_features(stacks[ch], target_order, max_degree)
            channels, target = ("f",), "f"
        else:
            feats = build_features(stacks, target_order, max_degree, target=ch)
            channels, target = names, ch
        t0 = time.perf_counter()
        fit = fit_cv(feats, lasso)
        elapsed += time.perf_counter() - t0
        models.append(SparseOdeModel.from_fit(fit, feats, dt, channels, target))
    if len(names) == 1:
        stacks = {"f": stacks[names[0]]}
    return models, stacks, elapsed


def fit_and_forecast(series: dict, dt: float, target_order: int, max_degree: int,
                     horizons, lasso: LassoConfig = LassoConfig()):
    """:func:`fit_models`, then a joint forecast from the end of ``series``.

    Returns ``(models, reports, fit_seconds, last_index)``; reports are keyed
    by the names in ``series``.
    """
    models, stacks, elapsed = fit_models(series, dt, target_order, max_degree, lasso)
    reports = forecast_system(models, stacks, horizons)
    if len(series) == 1:
        reports = {next(iter(series)): reports["f"]}
    last = next(iter(stacks.values())).last_index
    return models, reports, elapsed, last


def _run_order(cfg: ExperimentConfig, full: dict, n: int) -> OrderResult:
    H = cfg.horizons
    train = {ch: v[:cfg.train_length] for ch, v in full.items()}
    models, reports, elapsed, last = fit_and_forecast(
        train, cfg.dt, n, cfg.max_degree, H, cfg.lasso)
    scored = {ch: rep.score(full[ch][last + H]) for ch, rep in reports.items()}
    curve = np.mean([r.smape_by_horizon for r in scored.values()], axis=0)

    mse = None
    truth = true_coefficients(cfg.system, cfg.observed, n)
    if truth is not None:
        per_eq = []
        for m, true_map in zip(models, truth):
            if len(cfg.observed) == 1:
                true_map = {k.replace(cfg.observed[0], "f"): v for k, v in true_map.items()}
            per_eq.append(coefficient_mse(m.coefficient_map(), true_map,
                                          dictionary=m.labels))
        mse = math.fsum(per_eq) / len(per_eq)
    return OrderResult(n, models, scored, elapsed, curve, mse)


def _failed(n: int, cfg: ExperimentConfig, exc: Exception) -> OrderResult:
    curve = np.full(cfg.horizons.shape, DIVERGED_PENALTY)
    return OrderResult(n, [], {}, 0.0, curve, None, error=f"{type(exc).__name__}: {exc}")


def run_seed(cfg: ExperimentConfig, index: int, x0) -> SeedResult:
    orders = {}
    try:
        ts = integrate(cfg.system, x0, cfg.dt, cfg.series_length - 1)
    except LatentOdeError as exc:
        return SeedResult(index, np.asarray(x0), {n: _failed(n, cfg, exc) for n in cfg.target_orders})
    full = {ch: ts.channel(ch) for ch in cfg.observed}
    for n in cfg.target_orders:
        try:
            orders[n] = _run_order(cfg, full, n)
        except LatentOdeError as exc:
            orders[n] = _failed(n, cfg, exc)
    return SeedResult(index, np.asarray(x0), orders)


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentResult:
    """Run the multi-seed protocol.

    For every seed: draw a standard-normal initial state, simulate
    ``series_length`` samples, hold out the last ``max(horizons)``, fit each
    target order on the rest, forecast from the end of the training window
    and score against the held-out continuation. Failures are recorded per
    seed and scored as fully diverged.
    """
    x0s = sample_initial_conditions(config.system.dim, config.n_seeds, config.seed)
    per_seed = []
    for i, x0 in enumerate(x0s):
        per_seed.append(run_seed(config, i, x0))
        if progress is not None:
            progress(i + 1, config.n_seeds)
    return ExperimentResult(config, per_seed)


PRESETS = {
    "oscillator-x": dict(system="oscillator", observed=("x",)),
    "rossler-y": dict(system="rossler", observed=("y",)),
    "rossler-x": dict(system="rossler", observed=("x",)),
    "lorenz-x": dict(system="lorenz", observed=("x",)),
    "lorenz-full": dict(system="lorenz", observed=("x", "y", "z"), target_orders=(1,)),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    """Experiment configuration by preset name, with field overrides."""
    if name not in PRESETS:
        raise InvalidArgument(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    params = overrides.pop("params", None) or {}
    kw.update(overrides)
    kw["system"] = SystemSpec(kw["system"], params)
    return ExperimentConfig(**kw)
