"""Polynomial dictionaries over derivative columns.

Base variables are derivative orders ``0..n-1`` of each observed channel,
channel-major: ``(x, x', ..., y, y', ...)``. A single unnamed channel uses
the symbol ``f``.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

import numpy as np

from latentode.differentiation import DerivativeStack
from latentode.errors import InvalidArgument


@dataclass(frozen=True)
class Monomial:
    exponents: tuple

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def evaluate(self, base: np.ndarray) -> np.ndarray:
        """Evaluate on ``base`` of shape (rows, n_vars)."""
        out = np.ones(base.shape[0])
        for k, e in enumerate(self.exponents):
            if e:
                out = out * base[:, k] ** e
        return out

    def format(self, names: Sequence[str]) -> str:
        parts = []
        for name, e in zip(names, self.exponents):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return " * ".join(parts) if parts else "1"


def variable_names(target_order: int, channels: Sequence[str] = ("f",)) -> list:
    return [ch + "'" * k for ch in channels for k in range(target_order)]


def enumerate_monomials(n_vars: int, max_degree: int) -> list:
    """All monomials of total degree <= ``max_degree`` in graded lex order.

    Degree ascending; within a degree, exponent vectors in descending
    lexicographic order, so ``(f, f')`` at degree 2 gives
    ``1, f, f', f^2, f * f', f'^2``.
    """
    if n_vars < 1:
        raise InvalidArgument("n_vars must be >= 1")
    if max_degree < 0:
        raise InvalidArgument("max_degree must be >= 0")
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(n_vars), d):
            e = [0] * n_vars
            for k in combo:
                e[k] += 1
            out.append(Monomial(tuple(e)))
    assert len(out) == comb(n_vars + max_degree, max_degree)
    return out


def exponent_matrix(monomials: Sequence[Monomial]) -> np.ndarray:
    return np.array([m.exponents for m in monomials], dtype=np.int64).reshape(len(monomials), -1)


def evaluate_monomials(monomials: Sequence[Monomial], base: np.ndarray) -> np.ndarray:
    base = np.asarray(base, dtype=float)
    if base.ndim == 1:
        base = base[None, :]
    X = np.empty((base.shape[0], len(monomials)))
    for i, m in enumerate(monomials):
        X[:, i] = m.evaluate(base)
    return X


@dataclass(frozen=True)
class FeatureMatrix:
    """Design matrix ``X`` (rows x monomials) and target ``y``."""

    monomials: tuple
    names: tuple
    X: np.ndarray
    y: np.ndarray
    target_order: int
    max_degree: int

    @property
    def labels(self) -> list:
        return [m.format(self.names) for m in self.monomials]


def _as_stacks(stacks):
    if isinstance(stacks, DerivativeStack):
        return [stacks], ("f",)
    stacks = dict(stacks) if not isinstance(stacks, dict) else stacks
    return list(stacks.values()), tuple(stacks)


def build_features(stacks, target_order: int, max_degree: int, target=None) -> FeatureMatrix:
    """Evaluate the dictionary and pick the target derivative column.

    Parameters
    ----------
    stacks : DerivativeStack or mapping of channel name -> DerivativeStack
        One stack gives the single-channel dictionary over ``f``; a mapping
        builds the dictionary over every listed channel.
    target_order : int
        Order ``n`` of the regression target; regressors use orders < n.
    max_degree : int
    target : str, optional
        Channel whose n-th derivative is the target (default: first).
    """
    stack_list, channels = _as_stacks(stacks)
    if target_order < 1:
        raise InvalidArgument("target_order must be >= 1")
    if max_degree < 0:
        raise InvalidArgument("max_degree must be >= 0")
    for s in stack_list:
        if s.max_order < target_order:
            raise InvalidArgument(
                f"target order {target_order} exceeds stack max_order {s.max_order}")
    lengths = {len(s) for s in stack_list}
    offsets = {s.valid_offset for s in stack_list}
    if len(lengths) != 1 or len(offsets) != 1:
        raise InvalidArgument("all channel stacks must share one index window")
    if target is None:
        t_idx = 0
    elif target in channels:
        t_idx = channels.index(target)
    else:
        raise InvalidArgument(f"unknown target channel {target!r}")

    base = np.column_stack([s.columns[:, :target_order] for s in stack_list])
    names = tuple(variable_names(target_order, channels))
    monomials = tuple(enumerate_monomials(base.shape[1], max_degree))
    with np.errstate(over="ignore", invalid="ignore"):
        X = evaluate_monomials(monomials, base)
    y = np.array(stack_list[t_idx].columns[:, target_order])
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidArgument("non-finite entries in the design matrix")
    return FeatureMatrix(monomials, names, X, y, int(target_order), int(max_degree))
