import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from railservice.channel import ChannelParams, capacity_at_distance, min_rate_for_interval
from railservice.errors import DomainError, InfeasibleRequirementError, NoRootError, UnreachableRatioError
from railservice.geometry import ArcRail, LineRail, SineSeriesCurve
from railservice.placement import (
    Amount,
    Ratio,
    RootBracket,
    angle_from_amount,
    angle_from_ratio,
    bisect,
    interval_for_min_rate,
    interval_from_amount,
    interval_from_ratio,
    min_rate_to_ratio,
    onoff_window,
    place_by_amount,
    place_by_ratio,
    place_uniform,
)
from railservice.service import (
    TruncationRule,
    ratio_arc,
    ratio_line,
    service_between_arc,
    service_between_line,
    total_service_arc,
    total_service_line,
    x_infinity_line,
)

# mpmath.findroot on 30-digit mpmath.quad service integrals, SNR0 25 dB, alpha 3, d0 50
D_S_RATIO_08 = 543.03219125393683523
D_S_AMOUNT_23_V100 = 518.11854205030375793


# -- bisection ----------------------------------------------------------------------------

def test_bisect_simple_root():
    assert bisect(lambda x: x * x - 4, RootBracket(0.0, 10.0)) == pytest.approx(2.0, abs=1e-6)


def test_bisect_plateau_resolves_to_near_edge():
    step_fn = lambda x: min(max(x - 3.0, 0.0), 1.0) + max(x - 6.0, 0.0)  # noqa: E731
    # f == 1 on [4, 6]; scanning from lo stops at 4, from hi at 6
    assert bisect(step_fn, RootBracket(0.0, 10.0), 1.0, step=0.25) == pytest.approx(4.0, abs=1e-6)
    assert bisect(step_fn, RootBracket(0.0, 10.0), 1.0, step=0.25, from_hi=True) == pytest.approx(6.0, abs=1e-6)


def test_bisect_scan_finds_first_of_several_roots():
    f = math.sin
    assert bisect(f, RootBracket(1.0, 20.0), step=0.1) == pytest.approx(math.pi, abs=1e-6)
    assert bisect(f, RootBracket(1.0, 20.0), step=0.1, from_hi=True) == pytest.approx(6 * math.pi, abs=1e-6)


def test_bisect_errors():
    with pytest.raises(NoRootError):
        bisect(lambda x: x + 1, RootBracket(0.0, 5.0))
    with pytest.raises(NoRootError):
        bisect(lambda x: x + 1, RootBracket(0.0, 5.0), step=0.5)
    with pytest.raises(DomainError):
        RootBracket(3.0, 3.0)


@given(st.floats(-50.0, 50.0), st.floats(0.1, 10.0))
def test_bisect_on_monotone_cubic(root, scale):
    f = lambda x: scale * (x - root) ** 3 + (x - root)  # noqa: E731
    assert bisect(f, RootBracket(-100.0, 100.0, 1e-9)) == pytest.approx(root, abs=1e-8)


# -- line rail -----------------------------------------------------------------------------

def test_interval_from_ratio_reference(example_params):
    assert interval_from_ratio(example_params, 0.8) == pytest.approx(D_S_RATIO_08, abs=2e-6)


def test_interval_from_amount_reference(example_params):
    assert interval_from_amount(example_params, 100.0, 23.0) == pytest.approx(D_S_AMOUNT_23_V100, abs=2e-6)


@pytest.mark.parametrize("v", [50.0, 100.0, 150.0, 200.0])
def test_ratio_interval_holds_in_time_domain(example_params, v):
    d_s = interval_from_ratio(example_params, 0.6)
    got = service_between_line(example_params, v, -d_s / 2, d_s / 2) / total_service_line(example_params, v)
    assert got == pytest.approx(0.6, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(5.0, 25.0), st.floats(50.0, 150.0), st.floats(1.0, 60.0))
def test_amount_interval_grows_with_speed(snr_db, v, dv):
    p = ChannelParams.from_snr0_db(snr_db, 3.0, 50.0)
    amount = 0.3 * total_service_line(p, v + dv)
    assert interval_from_amount(p, v, amount) < interval_from_amount(p, v + dv, amount)


def test_unreachable_and_infeasible(example_params):
    with pytest.raises(UnreachableRatioError):
        interval_from_ratio(example_params, 1 - 1e-10)
    with pytest.raises(DomainError):
        interval_from_ratio(example_params, 1.0)
    total = total_service_line(example_params, 100.0)
    with pytest.raises(InfeasibleRequirementError) as info:
        interval_from_amount(example_params, 100.0, total * 1.01)
    assert info.value.bound == pytest.approx(total)


def test_min_rate_examples():
    p = ChannelParams(8 * 50.0**3, 3.0, 50.0)
    assert interval_for_min_rate(p, 1.0) == pytest.approx(100 * math.sqrt(3), rel=1e-12)
    assert min_rate_to_ratio(p, 1.0) == pytest.approx(ratio_line(p, 100 * math.sqrt(3)), rel=1e-12)
    peak = capacity_at_distance(p, 50.0)
    assert interval_for_min_rate(p, peak) == 0.0
    assert min_rate_to_ratio(p, peak) == 0.0
    with pytest.raises(DomainError):
        interval_for_min_rate(p, peak * 1.001)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95))
def test_min_rate_round_trip(eta):
    p = ChannelParams.from_snr0_db(25.0, 3.0, 50.0)
    r = min_rate_for_interval(p, interval_from_ratio(p, eta))
    assert min_rate_to_ratio(p, r) == pytest.approx(eta, abs=1e-8)


# -- arc rail ------------------------------------------------------------------------------------

ARC_PARAMS = ChannelParams.from_snr0_db(15.0, 3.0, 50.0)
ARC_RULE = TruncationRule(epsilon_capacity=1e-6)


def test_angle_from_ratio_is_speed_free():
    R = 30000.0
    theta = angle_from_ratio(ARC_PARAMS, R, 0.7, ARC_RULE)
    assert ratio_arc(ARC_PARAMS, R, theta, ARC_RULE) == pytest.approx(0.7, rel=1e-8)
    for v in (100.0, 150.0):
        s = service_between_arc(ARC_PARAMS, R, v, -theta * R / 2, theta * R / 2)
        assert s / total_service_arc(ARC_PARAMS, R, v, ARC_RULE) == pytest.approx(0.7, rel=1e-8)


def test_angle_from_amount_widens_with_speed():
    R = 30000.0
    a100 = angle_from_amount(ARC_PARAMS, R, 100.0, 5.0, ARC_RULE)
    a150 = angle_from_amount(ARC_PARAMS, R, 150.0, 5.0, ARC_RULE)
    assert a150 > a100
    assert service_between_arc(ARC_PARAMS, R, 150.0, -a150 * R / 2, a150 * R / 2) == pytest.approx(5.0, rel=1e-8)
    with pytest.raises(InfeasibleRequirementError):
        angle_from_amount(ARC_PARAMS, R, 100.0, 1e3, ARC_RULE)


def test_angle_tends_to_line_interval():
    p = ChannelParams.from_snr0_db(25.0, 3.0, 50.0)
    R = 1e6 * 50.0
    assert angle_from_ratio(p, R, 0.5) * R == pytest.approx(interval_from_ratio(p, 0.5), rel=1e-6)
    assert angle_from_amount(p, R, 100.0, 10.0) * R == pytest.approx(interval_from_amount(p, 100.0, 10.0), rel=1e-6)


# -- curve placement -----------------------------------------------------------------------------

WIDE_FLAT = SineSeriesCurve(50.0, [], [], (-500000.0, 500000.0))


def test_flat_curve_ratio_plan_is_uniform(example_params):
    plan = place_by_ratio(example_params, WIDE_FLAT, 0.8, max_per_side=3)
    d_s = interval_from_ratio(example_params, 0.8)
    widths = [s.width for s in plan.stations]
    assert len(widths) == 7
    assert np.allclose(widths, d_s, rtol=0, atol=1e-3)
    assert np.allclose(np.diff([s.bs_x for s in plan.stations]), d_s, rtol=0, atol=1e-3)


def test_flat_curve_amount_plan_is_uniform(example_params):
    plan = place_by_amount(example_params, WIDE_FLAT, 100.0, 23.0, max_per_side=2)
    d_s = interval_from_amount(example_params, 100.0, 23.0)
    assert np.allclose([s.width for s in plan.stations], d_s, rtol=0, atol=1e-3)


def check_plan_invariants(plan, params, curve, target, kind, v=None):
    st_ = plan.stations
    for left, right in zip(st_[:-1], st_[1:]):
        assert left.x_r == right.x_l
    for s in st_:
        assert s.bs_x == pytest.approx(0.5 * (s.x_l + s.x_r), abs=1e-9)
        assert curve.domain[0] <= s.x_l < s.x_r <= curve.domain[1]
        if kind == "ratio":
            assert s.delivered_ratio == pytest.approx(target, abs=1e-7)
        else:
            assert s.delivered_service == pytest.approx(target, abs=1e-6)
    assert [s.index for s in st_] == list(range(st_[0].index, st_[-1].index + 1))


def test_two_sine_curve_ratio_plan_invariants(example_params, example_curve):
    plan = place_by_ratio(example_params, example_curve, 0.8, max_per_side=4)
    assert len(plan.stations) == 9
    check_plan_invariants(plan, example_params, example_curve, 0.8, "ratio")
    assert "totals_clipped_to_domain" in plan.flags


def test_ratio_plan_ignores_speed(example_params, example_curve):
    a = place_by_ratio(example_params, example_curve, 0.8, max_per_side=2, v=100.0)
    b = place_by_ratio(example_params, example_curve, 0.8, max_per_side=2, v=150.0)
    assert a.boundaries == b.boundaries


def test_amount_plan_widens_with_speed(example_params, example_curve):
    # 150 m/s only collects about 19.5 bit/Hz per pass, so ask for less
    a = place_by_amount(example_params, example_curve, 100.0, 15.0, max_per_side=2)
    b = place_by_amount(example_params, example_curve, 150.0, 15.0, max_per_side=2)
    check_plan_invariants(a, example_params, example_curve, 15.0, "amount")
    assert all(wb > wa for wa, wb in zip([s.width for s in a.stations], [s.width for s in b.stations]))


def test_plan_truncates_on_short_rail(example_params):
    short = SineSeriesCurve(50.0, [2.0], [0.001], (-1500.0, 1700.0))
    plan = place_by_ratio(example_params, short, 0.8)
    assert "truncated" in plan.flags
    assert plan.leftover["right"][1] == 1700.0 and plan.leftover["left"][0] == -1500.0
    assert plan.stations[-1].x_r <= 1700.0 and plan.stations[0].x_l >= -1500.0
    check_plan_invariants(plan, example_params, short, 0.8, "ratio")


def test_amount_plan_infeasible_before_any_station(example_params, example_curve):
    with pytest.raises(InfeasibleRequirementError):
        place_by_amount(example_params, example_curve, 100.0, 1e4)


def test_plan_serialisation(example_params, example_curve):
    import json

    plan = place_by_ratio(example_params, example_curve, 0.8, max_per_side=1, v=100.0)
    d = json.loads(plan.to_json(extra_key=1))
    assert d["extra_key"] == 1
    assert [s["x_l"] for s in d["stations"]] == [s.x_l for s in plan.stations]
    rows = plan.to_csv().splitlines()
    assert rows[0].startswith("index,bs_x_m,x_l_m,x_r_m")
    assert len(rows) == 4


def test_uniform_line_and_arc_plans(example_params):
    plan = place_uniform(example_params, LineRail(), Ratio(0.8), n_per_side=2)
    d_s = interval_from_ratio(example_params, 0.8)
    assert plan.boundaries == pytest.approx([(k - 0.5) * d_s for k in range(-2, 4)])
    arc = place_uniform(ARC_PARAMS, ArcRail(30000.0, 50.0), Amount(5.0), v=100.0, n_per_side=1,
                        trunc=ARC_RULE)
    assert arc.meta["theta_rad"] * 30000.0 == pytest.approx(arc.stations[0].width)
    assert arc.stations[1].delivered_service == pytest.approx(5.0, rel=1e-8)
    with pytest.raises(DomainError):
        place_uniform(example_params, LineRail(), Amount(5.0))


def test_random_curves_always_find_their_roots():
    # coverage: every random draw places all requested stations
    rng = np.random.default_rng(20240611)
    params = ChannelParams.from_snr0_db(25.0, 3.0, 50.0)
    failures = []
    for _ in range(100):
        n = int(rng.integers(1, 4))
        amps = rng.uniform(0.0, 4.0, n)
        waves = 2 * math.pi / rng.uniform(500.0, 50000.0, n)
        phases = rng.uniform(0.0, 2 * math.pi, n)
        curve = SineSeriesCurve(50.0, amps, waves, (-10000.0, 10000.0), phases)
        eta = float(rng.uniform(0.05, 0.95))
        plan = place_by_ratio(params, curve, eta, max_per_side=2)
        if len(plan.stations) != 5 or "truncated" in plan.flags:
            failures.append((eta, amps, waves))
        check_plan_invariants(plan, params, curve, eta, "ratio")
    assert failures == []


# -- on-off windows ----------------------------------------------------------------------------

def test_onoff_ratio_window_is_speed_free(example_params):
    a = onoff_window(example_params, LineRail(), Ratio(0.6), 100.0)
    b = onoff_window(example_params, LineRail(), Ratio(0.6), 150.0)
    assert a.start_x == b.start_x and a.stop_x == b.stop_x
    assert a.start_t == pytest.approx(a.start_x / 100.0) and b.stop_t == pytest.approx(b.stop_x / 150.0)
    assert a.duration == pytest.approx(1.5 * b.duration)


def test_onoff_amount_window_grows(example_params, example_curve):
    a = onoff_window(example_params, LineRail(), Amount(15.0), 100.0)
    b = onoff_window(example_params, LineRail(), Amount(15.0), 150.0)
    assert b.stop_x > a.stop_x and a.start_t == -a.stop_t
    c = onoff_window(example_params, example_curve, Amount(15.0), 100.0)
    d = onoff_window(example_params, example_curve, Amount(15.0), 150.0)
    assert d.width > c.width and c.start_t < 0 < c.stop_t


def test_onoff_full_ratio_covers_support(example_params):
    hard = TruncationRule(far_field_tail=False)
    w = onoff_window(example_params, LineRail(), Ratio(1 - 1e-9), 100.0, hard)
    x_inf = x_infinity_line(example_params, hard)
    assert w.stop_x == pytest.approx(x_inf, rel=1e-2)


def test_onoff_on_arc():
    w = onoff_window(ARC_PARAMS, ArcRail(30000.0, 50.0), Ratio(0.5), 120.0, ARC_RULE)
    assert w.width == pytest.approx(angle_from_ratio(ARC_PARAMS, 30000.0, 0.5, ARC_RULE) * 30000.0)
