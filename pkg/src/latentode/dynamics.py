"""Benchmark dynamical systems and a fixed-step RK4 integrator.

Systems
-------
oscillator
    Linear 2-D system ``d(x, y)/dt = [[a, b], [c, d]] @ (x, y)``.
rossler
    ``x' = -y - z``, ``y' = x + a*y``, ``z' = b + z*(x - c)``.
lorenz
    ``x' = sigma*(y - x)``, ``y' = x*(rho - z) - y``, ``z' = x*y - beta*z``.
"""

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from latentode.errors import IntegrationDiverged, InvalidArgument

_DEFAULTS = {
    "oscillator": {"a": 0.1, "b": -1.0, "c": 1.0, "d": 0.0},
    "rossler": {"a": 0.52, "b": 2.0, "c": 4.0},
    "lorenz": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
}
_DIMS = {"oscillator": 2, "rossler": 3, "lorenz": 3}
_CHANNELS = {"oscillator": ("x", "y"), "rossler": ("x", "y", "z"), "lorenz": ("x", "y", "z")}

SYSTEMS = tuple(_DEFAULTS)


@dataclass(frozen=True)
class SystemSpec:
    """A named benchmark system with its coefficients.

    Unspecified parameters take the values used in the reference
    experiments (``oscillator``: a=0.1, b=-1, c=1, d=0; ``rossler``:
    a=0.52, b=2, c=4; ``lorenz``: sigma=10, rho=28, beta=8/3).
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _DEFAULTS:
            raise InvalidArgument(f"unknown system {self.kind!r}; expected one of {SYSTEMS}")
        unknown = set(self.params) - set(_DEFAULTS[kind])
        if unknown:
            raise InvalidArgument(f"unknown parameters for {kind}: {sorted(unknown)}")
        merged = dict(_DEFAULTS[kind])
        merged.update({k: float(v) for k, v in self.params.items()})
        if not all(np.isfinite(v) for v in merged.values()):
            raise InvalidArgument("system parameters must be finite")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", MappingProxyType(merged))

    @property
    def dim(self) -> int:
        return _DIMS[self.kind]

    @property
    def channel_names(self) -> tuple:
        return _CHANNELS[self.kind]


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled observations, ``values`` has shape (T, H)."""

    t0: float
    dt: float
    values: np.ndarray
    channel_names: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise InvalidArgument("values must be a (T, H) matrix")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise InvalidArgument(f"dt must be positive, got {self.dt}")
        if values.shape[0] < 2:
            raise InvalidArgument("a time series needs at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("time series values must be finite")
        names = tuple(self.channel_names)
        if len(names) != values.shape[1]:
            raise InvalidArgument(
                f"{len(names)} channel names for {values.shape[1]} channels")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def channel(self, name) -> np.ndarray:
        """Return one channel by name or integer index."""
        if isinstance(name, (int, np.integer)):
            return self.values[:, int(name)]
        try:
            return self.values[:, self.channel_names.index(name)]
        except ValueError:
            raise InvalidArgument(
                f"unknown channel {name!r}; available: {list(self.channel_names)}") from None


def rhs(spec: SystemSpec, state) -> np.ndarray:
    """Time derivative of ``state`` under ``spec``."""
    s = np.asarray(state, dtype=float)
    if s.shape != (spec.dim,):
        raise InvalidArgument(f"{spec.kind} state must have length {spec.dim}, got {s.shape}")
    p = spec.params
    if spec.kind == "oscillator":
        x, y = s
        return np.array([p["a"] * x + p["b"] * y, p["c"] * x + p["d"] * y])
    if spec.kind == "rossler":
        x, y, z = s
        return np.array([-y - z, x + p["a"] * y, p["b"] + z * (x - p["c"])])
    x, y, z = s
    return np.array([
        p["sigma"] * (y - x),
        x * (p["rho"] - z) - y,
        x * y - p["beta"] * z,
    ])


def integrate(spec: SystemSpec, x0, dt: float, steps: int, t0: float = 0.0) -> TimeSeries:
    """Classical fixed-step RK4; returns ``steps + 1`` samples starting at ``x0``.

    Raises
    ------
    IntegrationDiverged
        If the state becomes non-finite. ``last_valid`` is the index of the
        last finite sample.
    """
    x = np.array(x0, dtype=float)
    if x.shape != (spec.dim,):
        raise InvalidArgument(f"x0 must have length {spec.dim}, got {x.shape}")
    if not (dt > 0 and np.isfinite(dt)):
        raise InvalidArgument(f"dt must be positive, got {dt}")
    if int(steps) != steps or steps < 1:
        raise InvalidArgument(f"steps must be a positive integer, got {steps}")
    steps = int(steps)
    out = np.empty((steps + 1, spec.dim))
    out[0] = x
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            k1 = rhs(spec, x)
            k2 = rhs(spec, x + 0.5 * dt * k1)
            k3 = rhs(spec, x + 0.5 * dt * k2)
            k4 = rhs(spec, x + dt * k3)
            x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise IntegrationDiverged(i)
            out[i + 1] = x
    return TimeSeries(t0, dt, out, spec.channel_names)


def sample_initial_conditions(dim: int, count: int, seed: int) -> list:
    """Draw ``count`` standard-normal initial states of length ``dim``.

    Deterministic in ``seed``; a shorter draw is a prefix of a longer one.
    """
    if count < 1 or dim < 1:
        raise InvalidArgument("dim and count must be positive")
    draws = np.random.default_rng(seed).standard_normal((count, dim))
    return [row.copy() for row in draws]


def make_system(kind: str, params: Mapping[str, float] | None = None) -> SystemSpec:
    return SystemSpec(kind, dict(params or {}))


def default_params(kind: str) -> dict:
    return dict(_DEFAULTS[kind.lower()])


def subset(series: TimeSeries, channels: Sequence) -> TimeSeries:
    """Keep only the named channels (observed-variable selection)."""
    cols = [series.channel_names.index(c) if not isinstance(c, int) else c for c in channels]
    return TimeSeries(series.t0, series.dt, series.values[:, cols],
                      tuple(series.channel_names[c] for c in cols))
