"""Service: time integral of instantaneous capacity as a train passes a station.

For a train at constant speed ``v`` the time integral over a stretch of rail
equals ``1/v`` times the integral of capacity over arc length, so every
function here integrates in space and divides by ``v``. Service values are
in bits per unit bandwidth (bit/Hz); spatial integrals are in bit*m/(s*Hz).

Improper integrals over the whole pass are cut at ``x_inf``, the distance
beyond which capacity stays below :attr:`TruncationRule.epsilon_capacity`.
On the line rail the service beyond ``x_inf`` is added back from its
asymptotic expansion unless ``far_field_tail`` is switched off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import _backend
from .channel import LN2, ChannelParams, check_velocity
from .errors import DomainError, TruncationError
from .geometry import ArcRail, CurveRail, SampledCurve, SineSeriesCurve
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, check_result, graded_edges


@dataclass(frozen=True)
class TruncationRule:
    """Where the infinite pass integral is cut.

    Attributes:
        epsilon_capacity: Capacity (bits/s/Hz) below which the signal is
            treated as gone.
        far_field_tail: Add the asymptotic service beyond the cut on the
            line rail. Arc rails never use it (the pass must stay on the arc),
            curve rails are finite.
    """

    epsilon_capacity: float = 1e-9
    far_field_tail: bool = True

    def __post_init__(self):
        if not self.epsilon_capacity > 0:
            raise DomainError("epsilon_capacity must be positive")


DEFAULT_TRUNCATION = TruncationRule()


def support_distance(params: ChannelParams, trunc: TruncationRule = DEFAULT_TRUNCATION) -> float:
    """Transmitter distance at which capacity falls to ``epsilon_capacity``."""
    u = math.expm1(trunc.epsilon_capacity * LN2)
    return (params.gamma / u) ** (1.0 / params.alpha)


def x_infinity_line(params: ChannelParams, trunc: TruncationRule = DEFAULT_TRUNCATION) -> float:
    """Along-track truncation abscissa for the line rail."""
    d_inf = support_distance(params, trunc)
    if d_inf <= params.d0:
        raise TruncationError(
            f"capacity at the nearest point is already below epsilon={trunc.epsilon_capacity}")
    return math.sqrt(d_inf * d_inf - params.d0 * params.d0)


def far_field_tail(params: ChannelParams, x: float) -> float:
    """Asymptotic ``int_x^inf C dx`` on the line rail, in bit*m/(s*Hz).

    Expansion in ``d0/x`` and ``gamma/x**alpha`` to second order; meant for
    ``x`` far beyond ``d0`` where capacity is tiny.
    """
    g, a, d0 = params.gamma, params.alpha, params.d0
    lead = x ** (1.0 - a) / (a - 1.0)
    geom = 0.5 * a * d0 * d0 * x ** (-1.0 - a) / (a + 1.0)
    quad = 0.5 * g * x ** (1.0 - 2.0 * a) / (2.0 * a - 1.0)
    return g * (lead - geom - quad) / LN2


def truncation_error_bound(params: ChannelParams, trunc: TruncationRule = DEFAULT_TRUNCATION) -> float:
    """Line-rail service (per unit speed, both sides) ignored when the tail is dropped."""
    return 2.0 * far_field_tail(params, x_infinity_line(params, trunc))


# -- spatial integrals -------------------------------------------------------

def _kernels():
    return _backend.kernels


def line_integral(params: ChannelParams, x1: float, x2: float,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``int_{x1}^{x2} C(x) dx`` along a straight rail."""
    if x2 < x1:
        raise DomainError(f"x1={x1} exceeds x2={x2}")
    if x1 == x2:
        return 0.0
    edges = graded_edges(x1, x2, 0.0, params.d0)
    res = _kernels().simpson_line(params.gamma, params.alpha, params.d0, edges,
                                  cfg.rel_tol, cfg.abs_tol, int(cfg.max_depth))
    return check_result(*res, what="line service integral")


@lru_cache(maxsize=1024)
def line_half_integral(params: ChannelParams, trunc: TruncationRule = DEFAULT_TRUNCATION,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``int_0^inf C(x) dx`` on the line rail under the truncation rule."""
    x_inf = x_infinity_line(params, trunc)
    value = line_integral(params, 0.0, x_inf, cfg)
    if trunc.far_field_tail:
        value += far_field_tail(params, x_inf)
    return value


def line_cumulative(params: ChannelParams, x: float, trunc: TruncationRule = DEFAULT_TRUNCATION,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``int_0^|x| C dx`` consistent with :func:`line_half_integral`."""
    x = abs(x)
    x_inf = x_infinity_line(params, trunc)
    if x <= x_inf:
        return line_integral(params, 0.0, x, cfg)
    if not trunc.far_field_tail:
        return line_half_integral(params, trunc, cfg)
    return line_half_integral(params, trunc, cfg) - far_field_tail(params, x)


def total_service_line(params: ChannelParams, v: float, trunc: TruncationRule = DEFAULT_TRUNCATION,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Total service of one station over a whole pass on a straight rail."""
    v = check_velocity(v)
    return 2.0 * line_half_integral(params, trunc, cfg) / v


def service_up_to(params: ChannelParams, v: float, t: float,
                  trunc: TruncationRule = DEFAULT_TRUNCATION,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Service accumulated from the start of the pass up to time ``t``."""
    v = check_velocity(v)
    half = line_half_integral(params, trunc, cfg)
    g = line_cumulative(params, v * t, trunc, cfg)
    acc = half + g if t >= 0 else half - g
    return max(acc, 0.0) / v


def service_between_line(params: ChannelParams, v: float, x1: float, x2: float,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Service received between track positions ``x1 <= x2``."""
    v = check_velocity(v)
    return line_integral(params, x1, x2, cfg) / v


def ratio_line(params: ChannelParams, d_s: float, trunc: TruncationRule = DEFAULT_TRUNCATION,
               cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Fraction of a station's total service delivered in a centred region of length ``d_s``.

    No speed enters: numerator and denominator scale by the same ``1/v``.
    """
    if not d_s >= 0:
        raise DomainError(f"service distance must be non-negative, got {d_s}")
    return line_cumulative(params, 0.5 * d_s, trunc, cfg) / line_half_integral(params, trunc, cfg)


# -- closed forms for alpha = 2 ----------------------------------------------

def _require_alpha2(params: ChannelParams) -> None:
    if params.alpha != 2:
        raise DomainError(f"closed form only holds for alpha == 2, got alpha={params.alpha}")


def _alpha2_bracket(params: ChannelParams, d_s: float) -> float:
    # int_0^{d_s/2} ln(1 + gamma / (d0^2 + x^2)) dx
    g, d0 = params.gamma, params.d0
    h = 0.5 * d_s
    A = math.sqrt(g + d0 * d0)
    B = d0 * d0 + h * h
    return h * math.log1p(g / B) + 2.0 * A * math.atan(h / A) - 2.0 * d0 * math.atan(h / d0)


def half_integral_closed_alpha2(params: ChannelParams) -> float:
    """``int_0^inf ln(1 + gamma/(d0^2 + x^2)) dx = pi (sqrt(gamma + d0^2) - d0)`` in nats*m."""
    _require_alpha2(params)
    return math.pi * (math.sqrt(params.gamma + params.d0**2) - params.d0)


def ratio_line_closed_alpha2(params: ChannelParams, d_s: float) -> float:
    _require_alpha2(params)
    if not d_s >= 0:
        raise DomainError(f"service distance must be non-negative, got {d_s}")
    return _alpha2_bracket(params, d_s) / half_integral_closed_alpha2(params)


def velocity_for_amount_closed_alpha2(params: ChannelParams, d_s: float, amount: float) -> float:
    """Speed at which a centred region of length ``d_s`` delivers ``amount`` bits/Hz."""
    _require_alpha2(params)
    if not amount > 0:
        raise DomainError(f"service amount must be positive, got {amount}")
    if not d_s >= 0:
        raise DomainError(f"service distance must be non-negative, got {d_s}")
    return 2.0 / (amount * LN2) * _alpha2_bracket(params, d_s)


# -- arc rail ----------------------------------------------------------------

def x_infinity_arc(params: ChannelParams, R: float, trunc: TruncationRule = DEFAULT_TRUNCATION) -> float:
    """Arc length from the nearest point beyond which capacity stays below epsilon.

    Raises:
        TruncationError: If even the far side of the circle (``s = pi R``)
            still receives more than ``epsilon_capacity``.
    """
    arc = ArcRail(R, params.d0)
    d_inf = support_distance(params, trunc)
    if d_inf >= R + arc.Rs:
        raise TruncationError(
            f"capacity at the far side of the arc (distance {R + arc.Rs:.6g} m) exceeds "
            f"epsilon={trunc.epsilon_capacity}; total service is not contained in the arc")
    if d_inf <= params.d0:
        raise TruncationError("capacity at the nearest point is already below epsilon")
    h2 = (d_inf * d_inf - params.d0**2) / (4.0 * R * arc.Rs)
    return 2.0 * R * math.asin(math.sqrt(h2))


def arc_integral(params: ChannelParams, R: float, s1: float, s2: float,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``int_{s1}^{s2} C(s) ds`` along an arc rail, ``s`` in metres of arc."""
    if not R > params.d0:
        raise DomainError(f"arc radius {R} must exceed d0={params.d0}")
    if s2 < s1:
        raise DomainError(f"s1={s1} exceeds s2={s2}")
    if s1 == s2:
        return 0.0
    edges = graded_edges(s1, s2, 0.0, params.d0)
    res = _kernels().simpson_arc(params.gamma, params.alpha, params.d0, R, edges,
                                 cfg.rel_tol, cfg.abs_tol, int(cfg.max_depth))
    return check_result(*res, what="arc service integral")


@lru_cache(maxsize=1024)
def arc_half_integral(params: ChannelParams, R: float, trunc: TruncationRule = DEFAULT_TRUNCATION,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    return arc_integral(params, R, 0.0, x_infinity_arc(params, R, trunc), cfg)


def service_between_arc(params: ChannelParams, R: float, v: float, s1: float, s2: float,
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    v = check_velocity(v)
    return arc_integral(params, R, s1, s2, cfg) / v


def total_service_arc(params: ChannelParams, R: float, v: float,
                      trunc: TruncationRule = DEFAULT_TRUNCATION,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Total service of a station inside the arc, ``(1/v) int_{-x_inf}^{x_inf} C ds``."""
    v = check_velocity(v)
    return 2.0 * arc_half_integral(params, R, trunc, cfg) / v


def ratio_arc(params: ChannelParams, R: float, theta: float,
              trunc: TruncationRule = DEFAULT_TRUNCATION,
              cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Service ratio of a centred region subtending central angle ``theta``."""
    if not theta >= 0:
        raise DomainError(f"service angle must be non-negative, got {theta}")
    half = 0.5 * theta * R
    return arc_integral(params, R, 0.0, half, cfg) / arc_half_integral(params, R, trunc, cfg)


# -- irregular curve rail ----------------------------------------------------

def curve_integral(params: ChannelParams, curve: CurveRail, bs_x: float, x1: float, x2: float,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``int_{x1}^{x2} C(x) phi'(x) dx`` for a station at ``(bs_x, 0)``."""
    if x2 < x1:
        raise DomainError(f"x1={x1} exceeds x2={x2}")
    slack = 1e-9 * max(1.0, abs(curve.domain[0]), abs(curve.domain[1]))
    if not (curve.contains(x1, slack) and curve.contains(x2, slack)):
        raise DomainError(f"[{x1}, {x2}] not inside curve domain {curve.domain}")
    if x1 == x2:
        return 0.0
    edges = graded_edges(x1, x2, bs_x, params.d0)
    k = _kernels()
    g, a = params.gamma, params.alpha
    tol = (cfg.rel_tol, cfg.abs_tol, int(cfg.max_depth))
    if isinstance(curve, SineSeriesCurve):
        res = k.simpson_sine_curve(g, a, bs_x, curve.offset, curve.amplitudes, curve.wavenumbers,
                                   curve.phases, edges, *tol)
    elif isinstance(curve, SampledCurve):
        res = k.simpson_pchip_curve(g, a, bs_x, curve.knots, curve.coefficients, edges, *tol)
    else:
        f, speed = curve.f, curve.speed

        def integrand(x):
            dx = x - bs_x
            y = f(x)
            return math.log1p(g * (dx * dx + y * y) ** (-0.5 * a)) / LN2 * speed(x)

        res = k.simpson_callable(integrand, edges, *tol)
    return check_result(*res, what="curve service integral")


def curve_support(params: ChannelParams, curve: CurveRail, bs_x: float,
                  trunc: TruncationRule = DEFAULT_TRUNCATION) -> tuple[float, float, bool]:
    """Integration window for a station's total service on a finite curve.

    Returns ``(lo, hi, clipped)``; ``clipped`` is true when the curve domain
    cuts the capacity support, i.e. the total is short of the infinite-rail
    value.
    """
    d_inf = support_distance(params, trunc)
    lo = max(curve.domain[0], bs_x - d_inf)
    hi = min(curve.domain[1], bs_x + d_inf)
    clipped = lo > bs_x - d_inf or hi < bs_x + d_inf
    return lo, hi, clipped


def curve_total_integral(params: ChannelParams, curve: CurveRail, bs_x: float,
                         trunc: TruncationRule = DEFAULT_TRUNCATION,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    lo, hi, _ = curve_support(params, curve, bs_x, trunc)
    return curve_integral(params, curve, bs_x, lo, hi, cfg)


def service_between_curve(params: ChannelParams, curve: CurveRail, bs_x: float, x1: float,
                          x2: float, v: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Service from a station at ``(bs_x, 0)`` while the train runs from ``x1`` to ``x2``."""
    v = check_velocity(v)
    return curve_integral(params, curve, bs_x, x1, x2, cfg) / v


def total_service_curve(params: ChannelParams, curve: CurveRail, bs_x: float, v: float,
                        trunc: TruncationRule = DEFAULT_TRUNCATION,
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    v = check_velocity(v)
    return curve_total_integral(params, curve, bs_x, trunc, cfg) / v
