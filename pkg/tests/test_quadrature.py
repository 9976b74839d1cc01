import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from railservice.errors import ConvergenceError, DomainError
from railservice.quadrature import QuadratureConfig, graded_edges, integrate, trapezoid


def test_cubic_is_exact():
    val = integrate(lambda x: 4 * x**3 - 3 * x**2 + 2, -1.0, 2.0)
    assert val == pytest.approx(15.0 - 9.0 + 6.0, rel=1e-14)


def test_full_sine_period_is_not_fooled_by_coarse_samples():
    # Simpson on [0, 2pi] with three samples sees only zeros
    assert integrate(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-10)
    assert integrate(lambda x: math.sin(x) ** 2, 0.0, 2 * math.pi) == pytest.approx(math.pi, rel=1e-10)


def test_narrow_peak_on_long_interval_needs_breakpoints():
    f = lambda x: 1.0 / (1.0 + 1e6 * x * x)  # noqa: E731
    exact = 2.0 * math.atan(1e7) / 1e3
    edges = graded_edges(-1e4, 1e4, 0.0, 1e-3)
    got = integrate(f, -1e4, 1e4, breakpoints=edges)
    assert got == pytest.approx(exact, rel=1e-9)


def test_degenerate_and_reversed_limits():
    assert integrate(math.exp, 1.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        integrate(math.exp, 1.0, 0.0)
    with pytest.raises(DomainError):
        integrate(math.exp, 0.0, math.inf)


def test_depth_limit_raises_with_partial_estimate():
    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-300, max_depth=5)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sqrt(abs(x - 0.3)), 0.0, 1.0, cfg)
    exact = (2 / 3) * (0.3**1.5 + 0.7**1.5)
    assert info.value.partial == pytest.approx(exact, rel=1e-3)
    assert info.value.error_estimate >= 0


def test_bad_config_rejected():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(max_depth=0)


def test_graded_edges_layout():
    e = graded_edges(-1000.0, 300.0, 0.0, 10.0)
    assert e[0] == -1000.0 and e[-1] == 300.0
    assert 0.0 in e and 10.0 in e and -640.0 in e
    assert np.all(np.diff(e) > 0)
    # centre outside the interval still grades towards it
    e2 = graded_edges(100.0, 1000.0, 0.0, 50.0)
    assert list(e2) == [100.0, 200.0, 400.0, 800.0, 1000.0]


@settings(max_examples=25, deadline=None)
@given(st.floats(1e4, 1e9), st.floats(2.0, 4.5), st.floats(5.0, 200.0),
       st.floats(-2000.0, 0.0), st.floats(1.0, 3000.0))
def test_matches_trapezoid_reference(gamma, alpha, d0, a, width):
    b = a + width
    f = lambda x: np.log2(1 + gamma * (d0**2 + x**2) ** (-alpha / 2))  # noqa: E731
    ref = trapezoid(f, a, b, 200_000)
    got = integrate(lambda x: math.log2(1 + gamma * (d0**2 + x**2) ** (-alpha / 2)), a, b,
                    breakpoints=graded_edges(a, b, 0.0, d0))
    assert got == pytest.approx(ref, rel=1e-6)
