import math

import pytest
from hypothesis import given, strategies as st

from railservice.channel import (
    ChannelParams,
    bits_to_nats,
    capacity_at_distance,
    capacity_line,
    distance_for_capacity,
    min_rate_for_interval,
    nats_to_bits,
    path_loss,
    snr0_to_gamma,
)
from railservice.errors import DomainError

gammas = st.floats(1e2, 1e12)
alphas = st.floats(2.0, 5.0)
offsets = st.floats(1.0, 500.0)


def test_snr_conversion_matches_definition():
    gamma = snr0_to_gamma(25.0, 3.0, 50.0)
    assert gamma == pytest.approx(10**2.5 * 50.0**3, rel=1e-15)
    p = ChannelParams(gamma, 3.0, 50.0)
    assert p.snr0_db == pytest.approx(25.0, abs=1e-12)


def test_peak_capacity_is_log2_of_one_plus_snr0(example_params):
    assert capacity_at_distance(example_params, 50.0) == pytest.approx(math.log2(1 + 10**2.5))
    assert capacity_line(example_params, 100.0, 0.0) == pytest.approx(math.log2(1 + 10**2.5))


def test_capacity_line_is_even_in_time(example_params):
    assert capacity_line(example_params, 80.0, -3.0) == capacity_line(example_params, 80.0, 3.0)


@pytest.mark.parametrize("kwargs", [
    dict(gamma=0.0, alpha=3.0, d0=50.0),
    dict(gamma=1e6, alpha=1.5, d0=50.0),
    dict(gamma=1e6, alpha=3.0, d0=0.0),
    dict(gamma=math.inf, alpha=3.0, d0=50.0),
])
def test_channel_params_reject_bad_values(kwargs):
    with pytest.raises(DomainError):
        ChannelParams(**kwargs)


def test_path_loss_needs_positive_distance():
    assert path_loss(10.0, 2.0) == 100.0
    with pytest.raises(DomainError):
        path_loss(0.0, 3.0)
    with pytest.raises(DomainError):
        capacity_line(ChannelParams(1e6, 3.0, 50.0), -1.0, 0.0)


@given(gammas, alphas, offsets, st.floats(0.01, 0.99))
def test_distance_for_capacity_inverts_capacity(gamma, alpha, d0, frac):
    p = ChannelParams(gamma, alpha, d0)
    rate = frac * capacity_at_distance(p, d0)
    d = distance_for_capacity(p, rate)
    assert capacity_at_distance(p, d) == pytest.approx(rate, rel=1e-9)


@given(gammas, alphas, offsets, st.floats(0.0, 1e4), st.floats(1e-3, 1e3))
def test_min_rate_decreases_with_interval(gamma, alpha, d0, d_s, extra):
    p = ChannelParams(gamma, alpha, d0)
    assert min_rate_for_interval(p, d_s + extra) <= min_rate_for_interval(p, d_s)


def test_min_rate_of_zero_interval_is_peak(example_params):
    assert min_rate_for_interval(example_params, 0.0) == capacity_at_distance(example_params, 50.0)
    with pytest.raises(DomainError):
        min_rate_for_interval(example_params, -1.0)


@given(st.floats(-1e6, 1e6))
def test_unit_round_trip(x):
    assert nats_to_bits(bits_to_nats(x)) == pytest.approx(x, rel=1e-15, abs=1e-300)
