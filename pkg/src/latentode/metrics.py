"""Forecast error metrics."""

import numpy as np

from latentode.errors import InvalidArgument

DIVERGED_PENALTY = 2.0


def smape_terms(truth, forecast) -> np.ndarray:
    """Per-point ``|F - A| / ((|A| + |F|) / 2)``; a 0/0 point scores 0."""
    a = np.asarray(truth, dtype=float)
    f = np.asarray(forecast, dtype=float)
    if a.shape != f.shape:
        raise InvalidArgument(f"length mismatch: {a.shape} vs {f.shape}")
    # 2|F - A| / (|A| + |F|) keeps the bound exact; halving first loses it for subnormals
    num = 2.0 * np.abs(f - a)
    den = np.abs(a) + np.abs(f)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def smape(truth, forecast) -> float:
    """Symmetric mean absolute percentage error, in [0, 2]."""
    terms = smape_terms(truth, forecast)
    if terms.size == 0:
        raise InvalidArgument("smape needs at least one point")
    return float(np.mean(terms))


def cumulative_smape(truth, predictions) -> np.ndarray:
    """SMAPE over the first ``i + 1`` points, for every ``i``.

    ``predictions`` may be shorter than ``truth`` (a diverged forecast);
    each missing point scores :data:`DIVERGED_PENALTY`.
    """
    truth = np.asarray(truth, dtype=float)
    k = len(predictions)
    terms = np.full(truth.shape, DIVERGED_PENALTY)
    terms[:k] = smape_terms(truth[:k], predictions)
    return np.cumsum(terms) / np.arange(1, len(terms) + 1)
