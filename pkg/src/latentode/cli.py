"""Command-line interface.

Exit codes: 0 success, 1 numerical failure, 2 usage or input error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from latentode import __version__
from latentode.differentiation import differentiate
from latentode.dynamics import SYSTEMS, SystemSpec, default_params, integrate, sample_initial_conditions
from latentode.errors import IntegrationDiverged, InvalidArgument
from latentode.evaluation import PRESETS, fit_models, naive_forecast, preset, run_experiment
from latentode.io import read_models, read_timeseries, write_forecast, write_models, write_rows, write_timeseries
from latentode.lasso import LassoConfig
from latentode.metrics import cumulative_smape
from latentode.model import forecast_system

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
_PARAM_NAMES = sorted({k for s in SYSTEMS for k in default_params(s)})


class UsageError(Exception):
    pass


def parse_horizons(text: str) -> np.ndarray:
    """``"1..200"``, ``"1,5,10"`` or a mix such as ``"1..5,10,20"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    h = np.array(out, dtype=np.int64)
    if h.size == 0 or h[0] < 1 or np.any(np.diff(h) <= 0):
        raise UsageError(f"horizons must be positive and ascending: {text!r}")
    return h


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _add_lasso_flags(p):
    d = LassoConfig()
    g = p.add_argument_group("lasso")
    g.add_argument("--n-lambdas", type=_positive(int), default=d.n_lambdas)
    g.add_argument("--lambda-min-ratio", type=_positive(float), default=d.lambda_min_ratio)
    g.add_argument("--max-iter", type=_positive(int), default=d.max_iter)
    g.add_argument("--tol", type=_positive(float), default=d.tol)
    g.add_argument("--cv-folds", type=_positive(int), default=d.cv_folds)


def _lasso(args) -> LassoConfig:
    return LassoConfig(args.n_lambdas, args.lambda_min_ratio, args.max_iter, args.tol,
                       args.cv_folds)


def _channels(args, series) -> list:
    names = [c for item in args.channel for c in item.split(",") if c]
    for c in names:
        if c not in series.channel_names:
            raise InvalidArgument(
                f"unknown channel {c!r}; available: {list(series.channel_names)}")
    return names


def _train_length(args, series) -> int:
    n = args.train_length if args.train_length else len(series)
    if not 2 <= n <= len(series):
        raise InvalidArgument(f"train length {n} outside [2, {len(series)}]")
    return n


def cmd_simulate(args) -> int:
    params = {k: getattr(args, k) for k in _PARAM_NAMES if getattr(args, k) is not None}
    spec = SystemSpec(args.system, params)
    if args.x0 is not None:
        x0 = _floats(args.x0)
    else:
        x0 = sample_initial_conditions(spec.dim, 1, args.seed)[0]
    series = integrate(spec, x0, args.dt, args.steps, t0=args.t0)
    write_timeseries(series, args.output)
    return EXIT_OK


def cmd_fit(args) -> int:
    series = read_timeseries(args.input)
    names = _channels(args, series)
    n = _train_length(args, series)
    data = {c: series.channel(c)[:n] for c in names}
    models, _, seconds = fit_models(data, series.dt, args.target_order, args.degree,
                                    _lasso(args))
    write_models(models, args.output)
    for m in models:
        label = m.target if len(names) > 1 else names[0]
        print(f"[{label}] {m.equation(threshold=args.display_threshold)}")
        fit = m.fit
        print(f"    lambda={fit.lambda_selected:.6g} (path {fit.lambda_path[0]:.3g} .. "
              f"{fit.lambda_path[-1]:.3g}), nonzero={fit.n_nonzero}, "
              f"converged={fit.converged}")
    print(f"fit time {seconds:.3f} s")
    return EXIT_OK


def _forecast_from_args(args):
    models = read_models(args.model)
    series = read_timeseries(args.input)
    if not np.isclose(models[0].dt, series.dt, rtol=1e-6, atol=0.0):
        raise InvalidArgument(
            f"dt mismatch: model was fitted with dt={models[0].dt}, series has dt={series.dt}")
    n = _train_length(args, series)
    order = models[0].target_order
    if len(models) == 1 and models[0].channels == ("f",):
        if not args.channel:
            raise InvalidArgument("--channel is required for single-channel models")
        ch = _channels(args, series)
        if len(ch) != 1:
            raise InvalidArgument("a single-channel model takes exactly one --channel")
        names = ch
        stacks = {"f": differentiate(series.channel(ch[0])[:n], series.dt, order)}
    else:
        names = list(models[0].channels)
        stacks = {c: differentiate(series.channel(c)[:n], series.dt, order) for c in names}
    H = parse_horizons(args.horizons)
    reports = forecast_system(models, stacks, H)
    last = next(iter(stacks.values())).last_index
    out = {}
    for name, rep in zip(names, reports.values()):
        if last + H[-1] < len(series):
            rep = rep.score(series.channel(name)[last + H])
        out[name] = rep
    return out, series, n


def cmd_forecast(args) -> int:
    reports, _, _ = _forecast_from_args(args)
    out = Path(args.output)
    for name, rep in reports.items():
        path = out if len(reports) == 1 else out.with_name(f"{out.stem}_{name}{out.suffix}")
        write_forecast(rep, path)
        if rep.diverged_at is not None:
            print(f"[{name}] forecast diverged before horizon {rep.horizons[rep.diverged_at]}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    reports, series, n = _forecast_from_args(args)
    rows = [("channel", "horizon", "smape_model", "smape_naive")]
    for name, rep in reports.items():
        if rep.truth is None:
            raise InvalidArgument("series has no held-out points after the training window "
                                  "for the requested horizons; pass --train-length")
        naive = naive_forecast(series.channel(name)[:n], args.naive_window, rep.horizons)
        naive_curve = cumulative_smape(rep.truth, naive)
        for h, sm, sn in zip(rep.horizons, rep.smape_by_horizon, naive_curve):
            rows.append((name, str(int(h)), repr(float(sm)), repr(float(sn))))
    if args.output:
        write_rows(rows, args.output)
    width = max(len(r[0]) for r in rows)
    for r in rows:
        print(f"{r[0]:<{width}}  {r[1]:>7}  {r[2]:>22}  {r[3]:>22}")
    return EXIT_OK


def parse_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment.

    Keys: ``system``, ``observed``, ``n_seeds``, ``series_length``, ``dt``,
    ``target_orders``, ``max_degree``, ``horizons``, ``seed``,
    ``params.<name>`` and ``lasso.<field>``.
    """
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"no such config file: {path}")
    out, params, lasso = {}, {}, {}
    ints = {"n_seeds", "series_length", "max_degree", "seed"}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key.startswith("params."):
                params[key[7:]] = float(value)
            elif key.startswith("lasso."):
                field = key[6:]
                lasso[field] = int(value) if field in ("n_lambdas", "max_iter", "cv_folds") \
                    else float(value)
            elif key in ints:
                out[key] = int(value)
            elif key == "dt":
                out[key] = float(value)
            elif key == "system":
                out[key] = value
            elif key == "observed":
                out[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "target_orders":
                out[key] = tuple(int(v) for v in value.split(",") if v.strip())
            elif key == "horizons":
                out[key] = parse_horizons(value)
            else:
                raise InvalidArgument(f"{path}:{lineno}: unknown key {key!r}")
        except InvalidArgument:
            raise
        except (ValueError, UsageError) as exc:
            raise InvalidArgument(f"{path}:{lineno}: {exc}") from None
    if params:
        out["params"] = params
    if lasso:
        out["lasso"] = LassoConfig(**lasso)
    return out


def cmd_experiment(args) -> int:
    overrides = parse_config_file(args.config) if args.config else {}
    for key in ("n_seeds", "seed"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.horizons:
        overrides["horizons"] = parse_horizons(args.horizons)
    if "system" in overrides and "observed" not in overrides:
        raise InvalidArgument("config sets 'system' without 'observed'")
    cfg = preset(args.preset, **overrides)

    def progress(i, total):
        if not args.quiet:
            print(f"seed {i}/{total}", file=sys.stderr)

    result = run_experiment(cfg, progress)
    timing = not args.no_timing
    prefix = Path(args.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.json").write_text(json.dumps(result.to_dict(timing), indent=1) + "\n")
    write_rows(result.csv_rows(timing), f"{prefix}.csv")

    H = cfg.horizons
    marks = [h for h in (1, 10, 25, 50, 100, 125, 150, 200) if h in set(H.tolist())]
    idx = [int(np.searchsorted(H, h)) for h in marks]
    print(f"{args.preset}: {cfg.n_seeds} seeds, observed {','.join(cfg.observed)}, "
          f"degree {cfg.max_degree}")
    print("order  " + "  ".join(f"h={h:<5}" for h in marks) + "  fit_s    coef_mse")
    for n in cfg.target_orders:
        curve = result.mean_smape_by_horizon(n)
        mse = result.mean_coef_mse(n)
        print(f"{n:<5}  " + "  ".join(f"{curve[i]:<7.4f}" for i in idx)
              + f"  {result.mean_fit_time(n):<7.3f}  {'' if mse is None else f'{mse:.3g}'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentode",
        description="Recover ODEs from partially observed time series and forecast with them.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a benchmark system to CSV")
    p.add_argument("system", choices=SYSTEMS)
    for name in _PARAM_NAMES:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--x0", help="comma-separated initial state (default: N(0,1) draw)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=_positive(float), default=0.01)
    p.add_argument("--steps", type=_positive(int), default=4999)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a sparse ODE to one or more CSV channels")
    p.add_argument("input")
    p.add_argument("--channel", action="append", required=True,
                   help="observed channel; repeat or comma-separate for joint dictionaries")
    p.add_argument("--target-order", type=_positive(int), default=2)
    p.add_argument("--degree", type=_positive(int), default=3)
    p.add_argument("--train-length", type=_positive(int), default=None,
                   help="use only the first N samples")
    p.add_argument("--display-threshold", type=float, default=0.0)
    _add_lasso_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fit)

    for name, func, helptext in (("forecast", cmd_forecast, "forecast with a fitted model"),
                                 ("evaluate", cmd_evaluate, "SMAPE of model vs naive baseline")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("model")
        p.add_argument("input")
        p.add_argument("--channel", action="append", default=[])
        p.add_argument("--train-length", type=_positive(int), default=None,
                       help="forecast from the end of the first N samples (default: all)")
        p.add_argument("--horizons", default="1..200" if name == "forecast" else "1..15")
        if name == "evaluate":
            p.add_argument("--naive-window", type=_positive(int), default=24)
            p.add_argument("-o", "--output", default=None)
        else:
            p.add_argument("-o", "--output", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("experiment", help="run a multi-seed benchmark experiment")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--config", help="key = value overrides file")
    p.add_argument("--n-seeds", dest="n_seeds", type=_positive(int), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizons", default=None)
    p.add_argument("--no-timing", action="store_true",
                   help="omit fit times so outputs are byte-reproducible")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("-o", "--output", required=True, help="output prefix for .json and .csv")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidArgument, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
