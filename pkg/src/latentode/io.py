"""CSV and JSON readers/writers.

Floats are written with ``repr`` (shortest round-trip form), so reading a
written file gives back bitwise-identical values.
"""

import csv
import json
from pathlib import Path

import numpy as np

from latentode.dynamics import TimeSeries
from latentode.errors import InvalidArgument
from latentode.model import ForecastReport, SparseOdeModel


def _fmt(v) -> str:
    return repr(float(v))


def write_timeseries(series: TimeSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t",) + series.channel_names)
        for t, row in zip(series.times, series.values):
            w.writerow([_fmt(t)] + [_fmt(v) for v in row])


def read_timeseries(path, rel_tol: float = 1e-6) -> TimeSeries:
    """Read a ``t,<channels...>`` CSV; sampling must be uniform."""
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidArgument(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "t":
        raise InvalidArgument(f"{path}: header must be 't,<channel names...>'")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidArgument(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
        raise InvalidArgument(f"{path}: need at least 2 rows of {len(header)} columns")
    t = data[:, 0]
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if not dt > 0 or np.max(np.abs(np.diff(t) - dt)) > rel_tol * dt:
        raise InvalidArgument(f"{path}: time column is not uniformly increasing")
    return TimeSeries(t[0], dt, data[:, 1:], tuple(header[1:]))


def write_forecast(report: ForecastReport, path) -> None:
    """``horizon,prediction[,truth,smape]``; diverged horizons leave prediction empty."""
    scored = report.truth is not None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("horizon", "prediction", "truth", "smape") if scored else
                   ("horizon", "prediction"))
        k = len(report.predictions)
        for i, h in enumerate(report.horizons):
            row = [str(int(h)), _fmt(report.predictions[i]) if i < k else ""]
            if scored:
                row += [_fmt(report.truth[i]), _fmt(report.smape_by_horizon[i])]
            w.writerow(row)


def read_forecast(path) -> ForecastReport:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "horizon" not in rows[0] or "prediction" not in rows[0]:
        raise InvalidArgument(f"{path}: not a forecast report")
    horizons = np.array([int(r["horizon"]) for r in rows])
    preds = [float(r["prediction"]) for r in rows if r["prediction"] != ""]
    diverged = len(preds) if len(preds) < len(rows) else None
    truth = smape = None
    if "truth" in rows[0]:
        truth = np.array([float(r["truth"]) for r in rows])
        smape = np.array([float(r["smape"]) for r in rows])
    return ForecastReport(horizons, np.array(preds), truth, smape, diverged)


def write_models(models, path) -> None:
    payload = models[0].to_dict() if len(models) == 1 else {
        "models": [m.to_dict() for m in models]}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_models(path) -> list:
    path = Path(path)
    if not path.is_file():
        raise InvalidArgument(f"no such file: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: invalid JSON ({exc})") from None
    items = payload["models"] if isinstance(payload, dict) and "models" in payload else [payload]
    return [SparseOdeModel.from_dict(d) for d in items]


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
