import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentode import _fallback, kernels
from latentode.dictionary import enumerate_monomials, exponent_matrix

compiled = pytest.importorskip("latentode._ckernels")


def gram_problem(seed, n=120, p=7):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X[:, 2] = X[:, 0] + 0.1 * X[:, 2]
    X = (X - X.mean(0)) / X.std(0)
    y = X @ rng.standard_normal(p) + rng.standard_normal(n)
    return np.ascontiguousarray(X.T @ X / n), np.ascontiguousarray(X.T @ (y - y.mean()) / n)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), frac=st.floats(0.0, 1.2))
def test_cd_backends_agree_bitwise(seed, frac):
    gram, xty = gram_problem(seed)
    lam = frac * np.max(np.abs(xty))
    a, b = np.zeros(len(xty)), np.zeros(len(xty))
    ra = compiled.cd_gram(gram, xty, lam, a, 5000, 1e-9)
    rb = _fallback.cd_gram(gram, xty, lam, b, 5000, 1e-9)
    assert tuple(ra) == tuple(rb)
    assert np.array_equal(a, b)


def test_cd_skips_zero_spread_column():
    gram = np.array([[1.0, 0.0], [0.0, 0.0]])
    xty = np.array([0.5, 0.0])
    for impl in (compiled, _fallback):
        c = np.zeros(2)
        sweeps, ok = impl.cd_gram(gram, xty, 0.1, c, 100, 1e-12)
        assert ok
        np.testing.assert_allclose(c, [0.4, 0.0], atol=1e-15)


def poly_system(seed, order=2, channels=1, degree=3):
    rng = np.random.default_rng(seed)
    ms = enumerate_monomials(order * channels, degree)
    expo = exponent_matrix(ms)
    coefs = np.ascontiguousarray(0.3 * rng.standard_normal((channels, len(ms))))
    icpt = 0.1 * rng.standard_normal(channels)
    x0 = rng.standard_normal(order * channels)
    return expo, coefs, icpt, x0


@pytest.mark.parametrize("order,channels", [(1, 1), (2, 1), (3, 1), (1, 3), (2, 2)])
def test_rk4_backends_agree_bitwise(order, channels):
    expo, coefs, icpt, x0 = poly_system(order * 10 + channels, order, channels, 2)
    coefs *= 0.1
    out_a = np.zeros((300, channels))
    out_b = np.zeros((300, channels))
    da = compiled.rk4_poly(expo, coefs, icpt, order, x0, 0.01, 300, out_a)
    db = _fallback.rk4_poly(expo, coefs, icpt, order, x0, 0.01, 300, out_b)
    assert da == db
    assert np.array_equal(out_a[:da], out_b[:db])


def test_rk4_reports_blow_up():
    # f' = f^2 from f(0)=1 escapes at t=1
    expo = exponent_matrix(enumerate_monomials(1, 2))
    coefs = np.array([[0.0, 0.0, 1.0]])
    for impl in (compiled, _fallback):
        out = np.zeros((500, 1))
        done = impl.rk4_poly(expo, coefs, np.zeros(1), 1, np.array([1.0]), 0.01, 500, out)
        assert 90 < done < 500
        assert np.all(np.isfinite(out[:done]))


def test_backend_selection():
    forced = os.environ.get("LATENTODE_PURE", "") in ("1", "true", "yes")
    assert kernels.BACKEND == ("python" if forced else "cython")
    env = dict(os.environ, LATENTODE_PURE="1")
    out = subprocess.run([sys.executable, "-c",
                          "from latentode import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
