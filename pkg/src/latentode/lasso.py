"""Lasso by cyclic coordinate descent with a cross-validated penalty.

Objective, on standardized columns and centered target::

    (1 / (2N)) * ||y - X c||^2 + lam * ||c||_1

The intercept is unpenalized and recovered after unstandardizing, and
constant columns are absorbed into it.
"""

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from latentode import kernels
from latentode.errors import InvalidArgument


@dataclass(frozen=True)
class LassoConfig:
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-5
    max_iter: int = 10000
    tol: float = 1e-6
    cv_folds: int = 10

    def __post_init__(self):
        if self.n_lambdas < 1:
            raise InvalidArgument("n_lambdas must be >= 1")
        if not 0.0 < self.lambda_min_ratio < 1.0:
            raise InvalidArgument("lambda_min_ratio must be in (0, 1)")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be >= 1")
        if not self.tol > 0:
            raise InvalidArgument("tol must be positive")
        if self.cv_folds < 2:
            raise InvalidArgument("cv_folds must be >= 2")


class CDResult(NamedTuple):
    coef: np.ndarray
    n_sweeps: int
    converged: bool


@dataclass(frozen=True)
class LassoFit:
    """Cross-validated Lasso fit on the original (unstandardized) scale.

    Predictions are ``intercept + X @ coefficients``.
    """

    coefficients: np.ndarray
    intercept: float
    lambda_selected: float
    lambda_path: np.ndarray
    cv_mean_error: np.ndarray
    converged: bool
    kkt_violation: float
    degenerate: bool = False
    monomials: tuple = field(default=(), repr=False)

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.coefficients))

    def predict(self, X) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients


def standardize(X):
    """Column means and population standard deviations.

    Columns with zero spread get ``std = 0`` and are excluded from the
    penalized problem; the returned ``X_std`` holds zeros there.
    """
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    centered = X - mean
    std = np.sqrt(np.mean(centered ** 2, axis=0))
    scale = np.maximum(np.abs(mean), 1.0)
    const = std <= 1e-12 * scale
    std = np.where(const, 0.0, std)
    X_std = np.divide(centered, std, out=np.zeros_like(centered), where=~const)
    return X_std, mean, std


def lambda_max(X_std, y_centered) -> float:
    X_std = np.asarray(X_std, dtype=float)
    if X_std.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(X_std.T @ y_centered)) / X_std.shape[0])


def geometric_path(lam_max: float, config: LassoConfig) -> np.ndarray:
    if config.n_lambdas == 1:
        return np.array([lam_max])
    return lam_max * np.logspace(0.0, np.log10(config.lambda_min_ratio), config.n_lambdas)


def lambda_path(X_std, y_centered, config: LassoConfig = LassoConfig()) -> np.ndarray:
    """Descending geometric grid from ``max_j |X_j' y| / N`` down by ``lambda_min_ratio``.

    A zero target gives ``lambda_max = 0``; the path is then all zeros and
    every solution on it is the zero vector.
    """
    return geometric_path(lambda_max(X_std, y_centered), config)


def coordinate_descent(X_std, y_centered, lam: float, warm_start=None,
                       config: LassoConfig = LassoConfig()) -> CDResult:
    """Solve the Lasso at one penalty by cyclic coordinate descent.

    Sweeps stop once the largest coefficient change in a sweep falls below
    ``tol * max(1, max|c|)`` and the subgradient conditions hold within
    ``tol``. Running out of ``max_iter`` sweeps returns the last iterate
    with ``converged=False``.
    """
    X_std = np.asarray(X_std, dtype=float)
    y = np.asarray(y_centered, dtype=float)
    n = X_std.shape[0]
    gram = np.ascontiguousarray(X_std.T @ X_std / n)
    xty = np.ascontiguousarray(X_std.T @ y / n)
    return _solve(gram, xty, lam, warm_start, config)


def _solve(gram, xty, lam, warm_start, config) -> CDResult:
    p = gram.shape[0]
    coef = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    if coef.shape != (p,):
        raise InvalidArgument(f"warm start must have length {p}")
    if lam < 0:
        raise InvalidArgument("lambda must be non-negative")
    sweeps, ok = kernels.cd_gram(gram, xty, float(lam), coef, int(config.max_iter),
                                 float(config.tol))
    return CDResult(coef, int(sweeps), bool(ok))


def kkt_violation(X_std, y_centered, coef, lam: float) -> float:
    """Largest violation of the Lasso subgradient conditions.

    Zero-spread columns are skipped. A value <= tol certifies optimality
    at that tolerance independently of how ``coef`` was computed.
    """
    X_std = np.asarray(X_std, dtype=float)
    coef = np.asarray(coef, dtype=float)
    grad = X_std.T @ (y_centered - X_std @ coef) / X_std.shape[0]
    active = np.any(X_std != 0.0, axis=0)
    viol = np.where(coef == 0.0, np.maximum(np.abs(grad) - lam, 0.0),
                    np.abs(grad - lam * np.sign(coef)))
    viol = viol[active]
    return float(viol.max()) if viol.size else 0.0


def _path_solutions(gram, xty, path, config, upto=None):
    p = gram.shape[0]
    n = len(path) if upto is None else upto + 1
    coefs = np.zeros((n, p))
    ok = True
    c = np.zeros(p)
    for i in range(n):
        res = _solve(gram, xty, path[i], c, config)
        c = res.coef
        ok &= res.converged
        coefs[i] = c
    return coefs, ok


def _scaled_problem(X, y):
    X_std, mean, std = standardize(X)
    y_mean = float(y.mean())
    yc = y - y_mean
    y_scale = float(np.sqrt(np.mean(yc ** 2)))
    return X_std, mean, std, y_mean, yc, y_scale


def contiguous_folds(n_rows: int, k: int) -> list:
    return np.array_split(np.arange(n_rows), k)


def fit_cv(features, config: LassoConfig = LassoConfig()) -> LassoFit:
    """Pick the penalty by k-fold CV over contiguous blocks, then refit.

    ``features`` is a :class:`~latentode.dictionary.FeatureMatrix` or an
    ``(X, y)`` pair. Standardization uses training-fold statistics only.
    Ties in CV error go to the larger penalty.
    """
    if isinstance(features, tuple):
        X, y = features
        monomials = ()
    else:
        X, y, monomials = features.X, features.y, tuple(features.monomials)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < config.cv_folds:
        raise InvalidArgument(f"{n} rows cannot be split into {config.cv_folds} folds")
    if y.shape != (n,):
        raise InvalidArgument("y must have one entry per row of X")

    X_std, mean, std, y_mean, yc, y_scale = _scaled_problem(X, y)
    path = lambda_path(X_std, yc, config)
    if path[0] == 0.0:
        zero = np.zeros(p)
        return LassoFit(zero, y_mean, 0.0, path, np.zeros(config.n_lambdas), True, 0.0,
                        degenerate=True, monomials=monomials)

    cv_err = np.zeros(len(path))
    for test_idx in contiguous_folds(n, config.cv_folds):
        train = np.ones(n, dtype=bool)
        train[test_idx] = False
        Xs, m, s, ym, yc_tr, ys = _scaled_problem(X[train], y[train])
        X_te = np.divide(X[test_idx] - m, s, out=np.zeros((len(test_idx), p)), where=s > 0)
        if ys == 0.0:
            pred = np.full((len(path), len(test_idx)), ym)
        else:
            nt = Xs.shape[0]
            gram = np.ascontiguousarray(Xs.T @ Xs / nt)
            xty = np.ascontiguousarray(Xs.T @ (yc_tr / ys) / nt)
            coefs, _ = _path_solutions(gram, xty, path / ys, config)
            pred = ym + ys * (coefs @ X_te.T)
        cv_err += np.mean((pred - y[test_idx]) ** 2, axis=1)
    cv_err /= config.cv_folds

    best = int(np.argmin(cv_err))
    gram = np.ascontiguousarray(X_std.T @ X_std / n)
    xty = np.ascontiguousarray(X_std.T @ (yc / y_scale) / n)
    coefs, ok = _path_solutions(gram, xty, path / y_scale, config, upto=best)
    c_std = coefs[best]
    viol = kkt_violation(X_std, yc / y_scale, c_std, path[best] / y_scale)

    coef = np.divide(c_std * y_scale, std, out=np.zeros(p), where=std > 0)
    intercept = y_mean - float(coef @ mean)
    return LassoFit(coef, intercept, float(path[best]), path, cv_err, bool(ok), viol,
                    monomials=monomials)


def coefficient_mse(fit_coeffs: Mapping, true_coeffs: Mapping,
                    dictionary: Sequence | None = None) -> float:
    """Mean squared coefficient error, missing keys counting as zero.

    With ``dictionary`` the mean runs over every dictionary term (structural
    zeros included); otherwise over the union of keys.
    """
    keys = list(dictionary) if dictionary is not None else sorted(
        set(fit_coeffs) | set(true_coeffs), key=str)
    extra = (set(fit_coeffs) | set(true_coeffs)) - set(keys)
    if extra:
        raise InvalidArgument(f"coefficients outside the dictionary: {sorted(map(str, extra))}")
    if not keys:
        return 0.0
    diff = np.array([fit_coeffs.get(k, 0.0) - true_coeffs.get(k, 0.0) for k in keys])
    return float(np.mean(diff ** 2))
