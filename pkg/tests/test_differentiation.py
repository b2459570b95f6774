import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latentode.differentiation import differentiate, endpoint_state
from latentode.dynamics import SystemSpec, integrate
from latentode.errors import InvalidArgument


def test_quadratic_is_exact():
    dt = 0.1
    t = np.arange(0.0, 3.0 + dt / 2, dt)
    s = differentiate(t ** 2, dt, 2)
    tv = t[s.valid_offset:s.valid_offset + len(s)]
    assert np.max(np.abs(s.order(0) - tv ** 2)) == 0.0
    assert np.max(np.abs(s.order(1) - 2 * tv)) < 1e-10
    assert np.max(np.abs(s.order(2) - 2.0)) < 1e-8


def test_constant_has_zero_derivatives():
    s = differentiate(np.full(50, 5.0), 0.37, 3)
    assert np.all(s.columns[:, 0] == 5.0)
    assert np.all(s.columns[:, 1:] == 0.0)


def test_sine_third_derivative():
    dt = 0.01
    t = np.arange(0, 20, dt)
    s = differentiate(np.sin(t), dt, 3)
    tv = t[s.valid_offset:s.valid_offset + len(s)]
    assert np.max(np.abs(s.order(3) + np.cos(tv))) < 1e-3


def test_window_is_trimmed_symmetrically():
    s = differentiate(np.arange(20.0), 1.0, 3)
    assert s.valid_offset == 3
    assert len(s) == 20 - 6
    assert s.last_index == 16
    assert np.array_equal(s.order(0), np.arange(3.0, 17.0))


@settings(max_examples=60, deadline=None)
@given(coefs=st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       dt=st.sampled_from([0.05, 0.1, 0.2]))
def test_exact_on_polynomials_up_to_degree_j_plus_one(coefs, dt):
    # j-th iterated central difference is exact for degree <= j + 1
    t = np.arange(-1.0, 1.0 + dt / 2, dt)
    poly = np.polynomial.Polynomial(coefs)  # cubic
    quad = np.polynomial.Polynomial(coefs[:3])
    s3 = differentiate(poly(t), dt, 3)
    s2 = differentiate(quad(t), dt, 2)
    t3 = t[s3.valid_offset:s3.valid_offset + len(s3)]
    t2 = t[s2.valid_offset:s2.valid_offset + len(s2)]
    for j in (2, 3):
        np.testing.assert_allclose(s3.order(j), poly.deriv(j)(t3), rtol=0, atol=1e-8)
    for j in (1, 2):
        np.testing.assert_allclose(s2.order(j), quad.deriv(j)(t2), rtol=0, atol=1e-8)


def test_cubic_first_derivative_carries_truncation_term():
    dt = 0.1
    t = np.arange(0, 2, dt)
    s = differentiate(t ** 3, dt, 1)
    tv = t[1:-1]
    np.testing.assert_allclose(s.order(1) - 3 * tv ** 2, dt ** 2, rtol=1e-9)


@given(st.lists(st.floats(-1e3, 1e3), min_size=12, max_size=40), st.integers(0, 4))
def test_reversal_symmetry(values, order):
    x = np.array(values)
    fwd = differentiate(x, 0.1, order)
    rev = differentiate(x[::-1], 0.1, order)
    for j in range(order + 1):
        np.testing.assert_allclose(rev.order(j), (-1) ** j * fwd.order(j)[::-1],
                                   rtol=0, atol=1e-12)


def test_second_order_convergence():
    errs = []
    for dt in (0.02, 0.01):
        t = np.arange(0, 10, dt)
        s = differentiate(np.sin(t), dt, 1)
        tv = t[1:-1]
        errs.append(np.max(np.abs(s.order(1) - np.cos(tv))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


@pytest.mark.parametrize("series,order", [(np.arange(5.0), 2), (np.arange(3.0), 1)])
def test_too_short(series, order):
    with pytest.raises(InvalidArgument):
        differentiate(series, 0.1, order)


def test_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        differentiate([0.0, 1.0, np.nan, 2.0, 3.0], 0.1, 1)
    with pytest.raises(InvalidArgument):
        differentiate(np.arange(30.0), 0.1, 5)
    with pytest.raises(InvalidArgument):
        differentiate(np.arange(30.0), 0.0, 1)


def test_endpoint_of_constant():
    e = endpoint_state(differentiate(np.full(10, 5.0), 0.1, 2))
    assert np.array_equal(e, [5.0, 0.0])


def test_endpoint_of_line():
    dt = 0.1
    t = np.linspace(0.0, 1.0, 11)
    s = differentiate(t, dt, 2)
    e = endpoint_state(s)
    np.testing.assert_allclose(e, [t[s.last_index], 1.0], atol=1e-10)


def test_endpoint_matches_oscillator_solution():
    # oracle: closed-form solution of the pure rotation x = cos t, x' = -sin t
    dt = 0.01
    spec = SystemSpec("oscillator", {"a": 0.0, "b": -1.0, "c": 1.0, "d": 0.0})
    ts = integrate(spec, [1.0, 0.0], dt, 1000)
    s = differentiate(ts.channel("x"), dt, 2)
    t_end = ts.times[s.last_index]
    e = endpoint_state(s)
    assert abs(e[0] - np.cos(t_end)) < 1e-8
    assert abs(e[1] + np.sin(t_end)) < dt ** 2
