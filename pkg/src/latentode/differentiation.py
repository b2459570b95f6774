"""Finite-difference derivative stacks for uniformly sampled series.

The j-th derivative is the j-fold iterated 3-point central difference
``(f[i+1] - f[i-1]) / (2*dt)``. Each application loses one sample at each
end, so all orders are trimmed to the window of the highest order.
"""

from dataclasses import dataclass

import numpy as np

from latentode.errors import InvalidArgument

MAX_ORDER = 4


@dataclass(frozen=True)
class DerivativeStack:
    """Aligned derivative columns of orders ``0..max_order``.

    Row ``i`` corresponds to sample ``i + valid_offset`` of the source series.
    """

    dt: float
    max_order: int
    columns: np.ndarray
    valid_offset: int

    def __len__(self):
        return self.columns.shape[0]

    def order(self, j: int) -> np.ndarray:
        return self.columns[:, j]

    @property
    def last_index(self) -> int:
        """Index, in the source series, of the last valid row."""
        return self.valid_offset + len(self) - 1


def central_difference(values: np.ndarray, dt: float) -> np.ndarray:
    return (values[2:] - values[:-2]) / (2.0 * dt)


def differentiate(series, dt: float, max_order: int) -> DerivativeStack:
    """Stack the series and its first ``max_order`` derivatives.

    Parameters
    ----------
    series : array_like, shape (T,)
    dt : float
        Sampling step.
    max_order : int
        Highest derivative order, at most 4.

    Returns
    -------
    DerivativeStack
        ``T - 2*max_order`` rows; column 0 is the raw series on that window.
    """
    f = np.asarray(series, dtype=float)
    if f.ndim != 1:
        raise InvalidArgument("series must be one-dimensional")
    if int(max_order) != max_order or not 0 <= max_order <= MAX_ORDER:
        raise InvalidArgument(f"max_order must be an integer in [0, {MAX_ORDER}]")
    max_order = int(max_order)
    if not (dt > 0 and np.isfinite(dt)):
        raise InvalidArgument(f"dt must be positive, got {dt}")
    if f.shape[0] <= 2 * max_order + 1:
        raise InvalidArgument(
            f"series of length {f.shape[0]} too short for order {max_order} "
            f"(need > {2 * max_order + 1})")
    if not np.all(np.isfinite(f)):
        raise InvalidArgument("series contains non-finite values")

    n_rows = f.shape[0] - 2 * max_order
    cols = np.empty((n_rows, max_order + 1))
    d = f
    for j in range(max_order + 1):
        if j > 0:
            d = central_difference(d, dt)
        trim = max_order - j
        cols[:, j] = d[trim:trim + n_rows]
    cols.setflags(write=False)
    return DerivativeStack(float(dt), max_order, cols, max_order)


def endpoint_state(stack: DerivativeStack) -> np.ndarray:
    """Orders ``0..max_order-1`` at the last valid row (forecast initial state)."""
    if len(stack) == 0:
        raise InvalidArgument("empty derivative stack")
    return np.array(stack.columns[-1, :stack.max_order])
