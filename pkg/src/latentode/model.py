"""Recovered ODE models and forecasting by integration.

A model of target order ``n`` is integrated in companion form: the state
is ``(f, f', ..., f^(n-1))``, every component but the last shifts down,
and the last is ``intercept + sum_i c_i * A_i(state)``. Several per-channel
models over a shared multi-channel dictionary are integrated jointly the
same way.
"""

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from latentode import kernels
from latentode.dictionary import Monomial, evaluate_monomials, exponent_matrix, variable_names
from latentode.differentiation import DerivativeStack
from latentode.errors import IntegrationDiverged, InvalidArgument
from latentode.lasso import LassoFit
from latentode.metrics import cumulative_smape


@dataclass(frozen=True)
class SparseOdeModel:
    """``d^n target / dt^n = intercept + sum_i coefficients[i] * monomials[i]``.

    ``channels`` lists the series whose derivatives (orders ``0..n-1``)
    form the base variables; a single-channel model uses ``("f",)``.
    """

    target_order: int
    max_degree: int
    monomials: tuple
    coefficients: np.ndarray
    intercept: float
    dt: float
    channels: tuple = ("f",)
    target: str = "f"
    fit: LassoFit | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        coefs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "monomials", tuple(self.monomials))
        object.__setattr__(self, "channels", tuple(self.channels))
        if coefs.shape != (len(self.monomials),):
            raise InvalidArgument("one coefficient per monomial required")
        n_vars = self.target_order * len(self.channels)
        if any(len(m.exponents) != n_vars for m in self.monomials):
            raise InvalidArgument(
                f"monomials must have {n_vars} exponents for order {self.target_order}")
        if self.target not in self.channels:
            raise InvalidArgument(f"target {self.target!r} not among channels {self.channels}")

    @classmethod
    def from_fit(cls, fit: LassoFit, features, dt: float, channels=("f",), target=None):
        return cls(features.target_order, features.max_degree, tuple(features.monomials),
                   fit.coefficients, fit.intercept, dt, tuple(channels),
                   target or channels[0], fit)

    @property
    def names(self) -> list:
        return variable_names(self.target_order, self.channels)

    @property
    def labels(self) -> list:
        return [m.format(self.names) for m in self.monomials]

    def coefficient_map(self) -> dict:
        """Label -> coefficient, with the intercept on the constant term."""
        out = {}
        for m, label, c in zip(self.monomials, self.labels, self.coefficients):
            out[label] = float(c) + (self.intercept if m.is_constant else 0.0)
        if not any(m.is_constant for m in self.monomials):
            out["1"] = float(self.intercept)
        return out

    def equation(self, precision: int = 6, threshold: float = 0.0) -> str:
        lhs = self.target + "'" * self.target_order
        terms = []
        if self.intercept != 0.0 and abs(self.intercept) > threshold:
            terms.append(f"{self.intercept:.{precision}g}")
        for m, label, c in zip(self.monomials, self.labels, self.coefficients):
            if c != 0.0 and abs(c) > threshold and not m.is_constant:
                terms.append(f"{c:.{precision}g}*{label}")
        rhs = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"{lhs} = {rhs}"

    def to_dict(self) -> dict:
        d = {
            "target_order": self.target_order,
            "max_degree": self.max_degree,
            "monomials": self.labels,
            "exponents": [list(m.exponents) for m in self.monomials],
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": float(self.intercept),
            "dt": self.dt,
            "channels": list(self.channels),
            "target": self.target,
        }
        if self.fit is not None:
            d.update({
                "lambda_selected": self.fit.lambda_selected,
                "lambda_path": [float(v) for v in self.fit.lambda_path],
                "cv_mean_error": [float(v) for v in self.fit.cv_mean_error],
                "converged": self.fit.converged,
            })
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "SparseOdeModel":
        try:
            monomials = tuple(Monomial(tuple(int(e) for e in row)) for row in d["exponents"])
            fit = None
            if "lambda_path" in d:
                fit = LassoFit(np.asarray(d["coefficients"], dtype=float), float(d["intercept"]),
                               float(d["lambda_selected"]), np.asarray(d["lambda_path"]),
                               np.asarray(d["cv_mean_error"]), bool(d["converged"]),
                               float("nan"), monomials=monomials)
            return cls(int(d["target_order"]), int(d["max_degree"]), monomials,
                       np.asarray(d["coefficients"], dtype=float), float(d["intercept"]),
                       float(d["dt"]), tuple(d.get("channels", ("f",))),
                       d.get("target", "f"), fit)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"malformed model description: {exc}") from None


@dataclass(frozen=True)
class ForecastReport:
    """Predictions at integer step horizons.

    ``predictions`` stops at ``diverged_at`` when the integration blew up.
    ``smape_by_horizon[i]`` is the SMAPE over horizons ``0..i``, diverged
    points scoring 2.
    """

    horizons: np.ndarray
    predictions: np.ndarray
    truth: np.ndarray | None = None
    smape_by_horizon: np.ndarray | None = None
    diverged_at: int | None = None

    def score(self, truth) -> "ForecastReport":
        truth = np.asarray(truth, dtype=float)
        if truth.shape != self.horizons.shape:
            raise InvalidArgument(
                f"truth has {truth.size} points for {self.horizons.size} horizons")
        return ForecastReport(self.horizons, self.predictions, truth,
                              cumulative_smape(truth, self.predictions), self.diverged_at)


def _system_arrays(models: Sequence[SparseOdeModel]):
    first = models[0]
    for m in models[1:]:
        if (m.channels != first.channels or m.monomials != first.monomials
                or m.target_order != first.target_order):
            raise InvalidArgument("jointly integrated models must share channels, "
                                  "dictionary and target order")
    by_target = {m.target: m for m in models}
    if sorted(by_target) != sorted(first.channels) or len(by_target) != len(models):
        raise InvalidArgument(
            f"need exactly one model per channel {first.channels}, got targets "
            f"{[m.target for m in models]}")
    ordered = [by_target[ch] for ch in first.channels]
    coefs = np.ascontiguousarray(np.vstack([m.coefficients for m in ordered]))
    icpt = np.array([m.intercept for m in ordered], dtype=float)
    return ordered, exponent_matrix(first.monomials), coefs, icpt


def system_rhs(models: Sequence[SparseOdeModel], state) -> np.ndarray:
    ordered, _, coefs, icpt = _system_arrays(models)
    n = ordered[0].target_order
    s = np.asarray(state, dtype=float)
    if s.shape != (n * len(ordered),):
        raise InvalidArgument(f"state must have length {n * len(ordered)}")
    if not np.all(np.isfinite(s)):
        raise IntegrationDiverged(0, "non-finite model state")
    A = evaluate_monomials(ordered[0].monomials, s)[0]
    out = np.empty_like(s)
    for h in range(len(ordered)):
        block = slice(h * n, (h + 1) * n)
        out[block][:-1] = s[block][1:]
        out[h * n + n - 1] = icpt[h] + coefs[h] @ A
    return out


def model_rhs(model: SparseOdeModel, state) -> np.ndarray:
    """Companion-form derivative ``(f', ..., f^(n-1), model(state))``."""
    if len(model.channels) != 1:
        raise InvalidArgument("multi-channel models need system_rhs with one model per channel")
    return system_rhs([model], state)


def _check_horizons(horizons):
    h = np.asarray(horizons)
    if h.ndim != 1 or h.size == 0 or not np.all(np.isfinite(h)) or np.any(h != np.round(h)):
        raise InvalidArgument("horizons must be a non-empty vector of integers")
    h = h.astype(np.int64)
    if h[0] < 1 or np.any(np.diff(h) <= 0):
        raise InvalidArgument("horizons must be positive and strictly ascending")
    return h


def _integrate_forecast(ordered, expo, coefs, icpt, x0, dt, horizons):
    n_steps = int(horizons[-1])
    out = np.zeros((n_steps, len(ordered)))
    done = kernels.rk4_poly(expo, coefs, icpt, ordered[0].target_order,
                            np.ascontiguousarray(x0, dtype=float), float(dt), n_steps, out)
    if done >= n_steps:
        return out[horizons - 1], None
    cut = int(np.searchsorted(horizons, done + 1))
    return out[horizons[:cut] - 1], cut


def forecast_system(models: Sequence[SparseOdeModel], stacks: Mapping[str, DerivativeStack],
                    horizons) -> dict:
    """Forecast several jointly integrated channel models; one report per channel."""
    ordered, expo, coefs, icpt = _system_arrays(models)
    horizons = _check_horizons(horizons)
    n = ordered[0].target_order
    x0 = []
    last = set()
    for ch in ordered[0].channels:
        if ch not in stacks:
            raise InvalidArgument(f"no derivative stack for channel {ch!r}")
        st = stacks[ch]
        if st.max_order < n - 1:
            raise InvalidArgument(f"stack for {ch!r} lacks order {n - 1}")
        if not np.isclose(st.dt, ordered[0].dt, rtol=1e-9, atol=0.0):
            raise InvalidArgument(f"dt mismatch: model {ordered[0].dt}, series {st.dt}")
        x0.extend(st.columns[-1, :n])
        last.add(st.last_index)
    if len(last) != 1:
        raise InvalidArgument("channel stacks end at different samples")
    preds, cut = _integrate_forecast(ordered, expo, coefs, icpt, np.array(x0),
                                     ordered[0].dt, horizons)
    return {m.target: ForecastReport(horizons, np.array(preds[:, h]), diverged_at=cut)
            for h, m in enumerate(ordered)}


def forecast(model: SparseOdeModel, stack: DerivativeStack, horizons) -> ForecastReport:
    """Integrate from the last valid row of ``stack`` and read off ``f``.

    The initial state is the finite-difference estimate of orders
    ``0..n-1`` at that row; horizon ``h`` is ``h`` RK4 steps of ``dt``.
    """
    if len(model.channels) != 1:
        raise InvalidArgument("multi-channel models are forecast with forecast_system")
    if stack.max_order < model.target_order:
        raise InvalidArgument(
            f"stack max_order {stack.max_order} < model order {model.target_order}")
    return forecast_system([model], {model.channels[0]: stack}, horizons)[model.target]
