"""Invert service relations into station intervals, placements and on-off windows.

Line and arc rails reduce to one scalar equation each (service distance or
service angle). Irregular curves are solved station by station: each new
region starts where the previous one ended and the station sits at the
region's midpoint, found by a forward scan plus bisection.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Union

from .channel import ChannelParams, capacity_at_distance, check_velocity, distance_for_capacity
from .errors import DomainError, InfeasibleRequirementError, NoRootError, UnreachableRatioError
from .geometry import ArcRail, CurveRail, LineRail
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig
from .service import (
    DEFAULT_TRUNCATION,
    TruncationRule,
    arc_half_integral,
    arc_integral,
    curve_integral,
    curve_support,
    line_cumulative,
    line_half_integral,
    ratio_line,
    x_infinity_arc,
    x_infinity_line,
)

DEFAULT_BRACKET_TOL = 1e-6


@dataclass(frozen=True)
class Ratio:
    """Required fraction of a station's total service, in (0, 1)."""

    eta: float

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise DomainError(f"service ratio must lie in (0, 1), got {self.eta}")


@dataclass(frozen=True)
class Amount:
    """Required service per station in bits/Hz."""

    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0):
            raise DomainError(f"service amount must be positive, got {self.value}")


ServiceRequirement = Union[Ratio, Amount]


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = DEFAULT_BRACKET_TOL

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise DomainError("bracket tolerance must be positive")


def bisect(f: Callable[[float], float], bracket: RootBracket, target: float = 0.0,
           step: float | None = None, from_hi: bool = False) -> float:
    """First crossing of ``f(x) = target`` inside ``bracket``.

    The search starts at ``bracket.lo`` (or ``hi`` when ``from_hi``). With a
    ``step``, points are scanned at that spacing until ``f - target`` changes
    sign, so among several roots the one nearest the start is returned; a
    plateau sitting exactly on the target resolves to its near edge. Without
    a step the two ends must already straddle the target.

    Raises:
        NoRootError: If no sign change is found inside the bracket.
    """
    start, end = (bracket.hi, bracket.lo) if from_hi else (bracket.lo, bracket.hi)
    g0 = f(start) - target
    if g0 == 0:
        return start
    side0 = g0 > 0

    def crossed(x: float) -> bool:
        gx = f(x) - target
        return gx <= 0 if side0 else gx >= 0

    if step is None:
        if not crossed(end):
            raise NoRootError(f"f - target does not change sign on [{bracket.lo}, {bracket.hi}]")
        a, b = start, end
    else:
        if not step > 0:
            raise DomainError("scan step must be positive")
        direction = -1.0 if from_hi else 1.0
        a = start
        n = 1
        while True:
            b = start + direction * n * step
            if (b - end) * direction >= 0:
                b = end
            if crossed(b):
                break
            if b == end:
                raise NoRootError(f"no crossing of target {target} found scanning "
                                  f"[{bracket.lo}, {bracket.hi}] with step {step}")
            a = b
            n += 1
    for _ in range(200):
        if abs(b - a) <= bracket.tol:
            break
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if crossed(mid):
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)


def _grow_bracket(g: Callable[[float], float], target: float, start: float, limit: float) -> RootBracket:
    # doubling search for an upper bound of a nondecreasing g on [0, limit]
    lo, hi = 0.0, min(start, limit)
    while g(hi) < target and hi < limit:
        lo, hi = hi, min(2.0 * hi, limit)
    return RootBracket(lo, hi) if lo < hi else RootBracket(0.0, limit)


# -- line rail ---------------------------------------------------------------

def interval_from_ratio(params: ChannelParams, eta: float,
                        trunc: TruncationRule = DEFAULT_TRUNCATION,
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                        bracket_tol: float = DEFAULT_BRACKET_TOL) -> float:
    """Service distance ``d_s`` (m) whose centred region yields service ratio ``eta``.

    Train speed does not enter.
    """
    Ratio(eta)
    half = line_half_integral(params, trunc, cfg)
    x_inf = x_infinity_line(params, trunc)
    target = eta * half
    reach = line_cumulative(params, x_inf, trunc, cfg)
    if target > reach:
        raise UnreachableRatioError(
            f"ratio {eta} exceeds the largest ratio {reach / half:.12g} reachable inside the "
            f"truncated support |x| <= {x_inf:.6g} m", bound=reach / half)

    def g(h):
        return line_cumulative(params, h, trunc, cfg)

    br = _grow_bracket(g, target, params.d0, x_inf)
    return 2.0 * bisect(g, RootBracket(br.lo, br.hi, bracket_tol), target)


def interval_from_amount(params: ChannelParams, v: float, amount: float,
                         trunc: TruncationRule = DEFAULT_TRUNCATION,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                         bracket_tol: float = DEFAULT_BRACKET_TOL) -> float:
    """Service distance ``d_s`` (m) over which a train at speed ``v`` receives ``amount``."""
    v = check_velocity(v)
    Amount(amount)
    half = line_half_integral(params, trunc, cfg)
    total = 2.0 * half / v
    if amount >= total:
        raise InfeasibleRequirementError(
            f"required service {amount:.6g} bit/Hz is not below the total service "
            f"{total:.6g} bit/Hz at v={v} m/s", bound=total)
    x_inf = x_infinity_line(params, trunc)
    target = 0.5 * v * amount
    reach = line_cumulative(params, x_inf, trunc, cfg)
    if target > reach:
        raise InfeasibleRequirementError(
            f"required service {amount:.6g} bit/Hz needs a region wider than the truncated "
            f"support (max {2.0 * reach / v:.6g} bit/Hz)", bound=2.0 * reach / v)

    def g(h):
        return line_cumulative(params, h, trunc, cfg)

    br = _grow_bracket(g, target, params.d0, x_inf)
    return 2.0 * bisect(g, RootBracket(br.lo, br.hi, bracket_tol), target)


def interval_for_min_rate(params: ChannelParams, r_m: float) -> float:
    """Service distance whose region edge sees exactly ``r_m`` bits/s/Hz."""
    peak = capacity_at_distance(params, params.d0)
    if not 0 < r_m <= peak:
        raise DomainError(f"minimum rate must lie in (0, {peak:.6g}], got {r_m}")
    d_b = distance_for_capacity(params, r_m)
    return 2.0 * math.sqrt(max(d_b * d_b - params.d0**2, 0.0))


def min_rate_to_ratio(params: ChannelParams, r_m: float,
                      trunc: TruncationRule = DEFAULT_TRUNCATION,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Service ratio equivalent to guaranteeing ``r_m`` at the region edge."""
    return ratio_line(params, interval_for_min_rate(params, r_m), trunc, cfg)


# -- arc rail ----------------------------------------------------------------

def angle_from_ratio(params: ChannelParams, R: float, eta: float,
                     trunc: TruncationRule = DEFAULT_TRUNCATION,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                     bracket_tol: float = DEFAULT_BRACKET_TOL) -> float:
    """Central angle (rad) of the region giving service ratio ``eta`` on an arc rail."""
    Ratio(eta)
    s_inf = x_infinity_arc(params, R, trunc)
    target = eta * arc_half_integral(params, R, trunc, cfg)

    def g(s):
        return arc_integral(params, R, 0.0, s, cfg)

    br = _grow_bracket(g, target, params.d0, s_inf)
    s = bisect(g, RootBracket(br.lo, br.hi, bracket_tol), target)
    return 2.0 * s / R


def angle_from_amount(params: ChannelParams, R: float, v: float, amount: float,
                      trunc: TruncationRule = DEFAULT_TRUNCATION,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                      bracket_tol: float = DEFAULT_BRACKET_TOL) -> float:
    """Central angle (rad) over which a train at speed ``v`` receives ``amount``."""
    v = check_velocity(v)
    Amount(amount)
    s_inf = x_infinity_arc(params, R, trunc)
    half = arc_half_integral(params, R, trunc, cfg)
    total = 2.0 * half / v
    if amount >= total:
        raise InfeasibleRequirementError(
            f"required service {amount:.6g} bit/Hz is not below the total arc service "
            f"{total:.6g} bit/Hz at v={v} m/s", bound=total)
    target = 0.5 * v * amount

    def g(s):
        return arc_integral(params, R, 0.0, s, cfg)

    br = _grow_bracket(g, target, params.d0, s_inf)
    s = bisect(g, RootBracket(br.lo, br.hi, bracket_tol), target)
    return 2.0 * s / R


# -- placement plans -----------------------------------------------------------

@dataclass
class Station:
    index: int
    bs_x: float
    x_l: float
    x_r: float
    delivered_ratio: float | None = None
    delivered_service: float | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.x_r - self.x_l


@dataclass
class PlacementPlan:
    """Ordered stations with contiguous service regions.

    ``leftover`` holds the uncovered stretch at each end of a finite rail
    (``None`` where the plan stopped on the station count instead).
    """

    geometry: str
    requirement: dict
    stations: list[Station]
    flags: list[str] = field(default_factory=list)
    leftover: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def boundaries(self) -> list[float]:
        edges = [s.x_l for s in self.stations]
        if self.stations:
            edges.append(self.stations[-1].x_r)
        return edges

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "requirement": self.requirement,
            "flags": list(self.flags),
            "meta": self.meta,
            "leftover": self.leftover,
            "boundaries": self.boundaries,
            "stations": [asdict(s) for s in self.stations],
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "bs_x_m", "x_l_m", "x_r_m", "width_m", "delivered_ratio",
                    "delivered_service_bits_per_hz", "flags"])
        for s in self.stations:
            w.writerow([s.index, repr(s.bs_x), repr(s.x_l), repr(s.x_r), repr(s.width),
                        "" if s.delivered_ratio is None else repr(s.delivered_ratio),
                        "" if s.delivered_service is None else repr(s.delivered_service),
                        ";".join(s.flags)])
        return buf.getvalue()


def _requirement_dict(req: ServiceRequirement) -> dict:
    if isinstance(req, Ratio):
        return {"ratio": req.eta}
    return {"amount": req.value}


def _place_curve(params: ChannelParams, curve: CurveRail, requirement: ServiceRequirement,
                 v: float | None, trunc: TruncationRule, cfg: QuadratureConfig,
                 bracket_tol: float, max_per_side: int | None, origin: float,
                 scan_step: float | None) -> PlacementPlan:
    x_lo, x_hi = curve.domain
    if not curve.contains(origin):
        raise DomainError(f"first station abscissa {origin} outside curve domain {curve.domain}")
    step = params.d0 / 10.0 if scan_step is None else scan_step
    is_ratio = isinstance(requirement, Ratio)

    def denom(bs):
        return curve_integral(params, curve, bs, *curve_support(params, curve, bs, trunc)[:2], cfg)

    def delivered(bs, a, b):
        return curve_integral(params, curve, bs, a, b, cfg)

    if is_ratio:
        def score(bs, a, b):
            return delivered(bs, a, b) / denom(bs)
        target = requirement.eta
    else:
        def score(bs, a, b):
            return delivered(bs, a, b) / v
        target = requirement.value

    def make_station(k, bs, a, b):
        num = delivered(bs, a, b)
        d = denom(bs)
        flags = []
        if curve_support(params, curve, bs, trunc)[2]:
            flags.append("total_clipped_to_domain")
        return Station(index=k, bs_x=bs, x_l=a, x_r=b, delivered_ratio=num / d,
                       delivered_service=None if v is None else num / v, flags=flags)

    # BS_0: symmetric region around the origin, monotone in its half width
    reach0 = min(origin - x_lo, x_hi - origin)
    if not is_ratio and score(origin, origin - reach0, origin + reach0) < target:
        bound = denom(origin) / v
        raise InfeasibleRequirementError(
            f"first station cannot deliver {target:.6g} bit/Hz inside the rail domain "
            f"(total available {bound:.6g} bit/Hz at v={v} m/s)", bound=bound)
    plan_flags: list[str] = []
    g0 = lambda r: score(origin, origin - r, origin + r)  # noqa: E731
    try:
        br = _grow_bracket(g0, target, params.d0, reach0)
        r0 = bisect(g0, RootBracket(br.lo, br.hi, bracket_tol), target)
    except NoRootError:
        return PlacementPlan(geometry="curve", requirement=_requirement_dict(requirement),
                             stations=[], flags=["truncated"],
                             leftover={"left": [x_lo, origin], "right": [origin, x_hi]})
    stations = [make_station(0, origin, origin - r0, origin + r0)]
    leftover: dict = {"left": None, "right": None}

    for side in (1, -1):
        edge = stations[0].x_r if side > 0 else stations[0].x_l
        k = 0
        while max_per_side is None or k < max_per_side:
            k += 1
            limit = 0.5 * (edge + (x_hi if side > 0 else x_lo))
            if abs(limit - edge) <= bracket_tol:
                leftover["right" if side > 0 else "left"] = sorted([edge, x_hi if side > 0 else x_lo])
                plan_flags.append("truncated")
                break

            def g(bs, edge=edge):
                mirror = 2.0 * bs - edge
                a, b = (edge, mirror) if side > 0 else (mirror, edge)
                return score(bs, a, b)

            lo, hi = (edge, limit) if side > 0 else (limit, edge)
            try:
                bs = bisect(g, RootBracket(lo, hi, bracket_tol), target, step=step, from_hi=side < 0)
            except NoRootError:
                leftover["right" if side > 0 else "left"] = sorted([edge, x_hi if side > 0 else x_lo])
                plan_flags.append("truncated")
                break
            mirror = 2.0 * bs - edge
            a, b = (edge, mirror) if side > 0 else (mirror, edge)
            # snap the far edge back into the domain after bisection rounding
            a, b = max(a, x_lo), min(b, x_hi)
            stations.append(make_station(side * k, bs, a, b))
            edge = b if side > 0 else a

    stations.sort(key=lambda s: s.bs_x)
    if any("total_clipped_to_domain" in s.flags for s in stations):
        plan_flags.append("totals_clipped_to_domain")
    meta = {"domain": list(curve.domain), "scan_step_m": step, "bracket_tol_m": bracket_tol,
            "epsilon_capacity": trunc.epsilon_capacity}
    if v is not None:
        meta["v_m_per_s"] = v
    return PlacementPlan(geometry="curve", requirement=_requirement_dict(requirement),
                         stations=stations, flags=sorted(set(plan_flags)), leftover=leftover,
                         meta=meta)


def place_by_ratio(params: ChannelParams, curve: CurveRail, eta: float,
                   trunc: TruncationRule = DEFAULT_TRUNCATION,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                   bracket_tol: float = DEFAULT_BRACKET_TOL,
                   max_per_side: int | None = None, v: float | None = None,
                   origin: float = 0.0, scan_step: float | None = None) -> PlacementPlan:
    """Place stations along a curve rail so each delivers ratio ``eta`` of its total.

    The first station sits at ``origin`` with a symmetric region; every
    further station shares its inner edge with its neighbour and is centred
    in its own region. On each side the root nearest the shared edge is
    taken. Placement stops after ``max_per_side`` stations per side or when
    the next region would leave the curve domain (plan flag ``truncated``).
    ``v`` only affects the reported ``delivered_service``.
    """
    if v is not None:
        v = check_velocity(v)
    return _place_curve(params, curve, Ratio(eta), v, trunc, cfg, bracket_tol, max_per_side,
                        origin, scan_step)


def place_by_amount(params: ChannelParams, curve: CurveRail, v: float, amount: float,
                    trunc: TruncationRule = DEFAULT_TRUNCATION,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    bracket_tol: float = DEFAULT_BRACKET_TOL,
                    max_per_side: int | None = None, origin: float = 0.0,
                    scan_step: float | None = None) -> PlacementPlan:
    """Place stations along a curve rail so each delivers ``amount`` bits/Hz at speed ``v``.

    Raises:
        InfeasibleRequirementError: If even the first station cannot deliver
            the amount within the rail domain.
    """
    v = check_velocity(v)
    return _place_curve(params, curve, Amount(amount), v, trunc, cfg, bracket_tol, max_per_side,
                        origin, scan_step)


def place_uniform(params: ChannelParams, geometry: LineRail | ArcRail,
                  requirement: ServiceRequirement, v: float | None = None, n_per_side: int = 5,
                  trunc: TruncationRule = DEFAULT_TRUNCATION,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                  bracket_tol: float = DEFAULT_BRACKET_TOL) -> PlacementPlan:
    """Equally spaced plan on a line or arc rail (positions in metres along the track)."""
    if isinstance(requirement, Amount) and v is None:
        raise DomainError("an amount requirement needs the train speed")
    meta: dict = {}
    if isinstance(geometry, ArcRail):
        R = geometry.R
        if isinstance(requirement, Ratio):
            theta = angle_from_ratio(params, R, requirement.eta, trunc, cfg, bracket_tol)
        else:
            theta = angle_from_amount(params, R, v, requirement.value, trunc, cfg, bracket_tol)
        d_s = theta * R
        meta.update(theta_rad=theta, R_m=R)
        num = arc_integral(params, R, 0.0, 0.5 * d_s, cfg)
        den = arc_half_integral(params, R, trunc, cfg)
        if (n_per_side + 0.5) * d_s > math.pi * R:
            raise DomainError(f"{2 * n_per_side + 1} regions of {d_s:.6g} m do not fit on the circle")
        name = "arc"
    else:
        if isinstance(requirement, Ratio):
            d_s = interval_from_ratio(params, requirement.eta, trunc, cfg, bracket_tol)
        else:
            d_s = interval_from_amount(params, v, requirement.value, trunc, cfg, bracket_tol)
        num = line_cumulative(params, 0.5 * d_s, trunc, cfg)
        den = line_half_integral(params, trunc, cfg)
        name = "line"
    meta["d_s_m"] = d_s
    if v is not None:
        meta["v_m_per_s"] = v
    stations = []
    for k in range(-n_per_side, n_per_side + 1):
        c = k * d_s
        stations.append(Station(index=k, bs_x=c, x_l=c - 0.5 * d_s, x_r=c + 0.5 * d_s,
                                delivered_ratio=num / den,
                                delivered_service=None if v is None else 2.0 * num / v))
    return PlacementPlan(geometry=name, requirement=_requirement_dict(requirement),
                         stations=stations, meta=meta)


# -- on-off transmission -------------------------------------------------------

@dataclass(frozen=True)
class TransmissionWindow:
    """Where and when a station transmits during one pass.

    Positions are metres along the track from the station's nearest point
    (arc length on arc rails, deployment-axis abscissa on curve rails).
    """

    start_x: float
    stop_x: float
    start_t: float
    stop_t: float
    v: float

    @property
    def width(self) -> float:
        return self.stop_x - self.start_x

    @property
    def duration(self) -> float:
        return self.stop_t - self.start_t


def onoff_window(params: ChannelParams, geometry: LineRail | ArcRail | CurveRail,
                 requirement: ServiceRequirement, v: float,
                 trunc: TruncationRule = DEFAULT_TRUNCATION,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 bracket_tol: float = DEFAULT_BRACKET_TOL, bs_x: float = 0.0) -> TransmissionWindow:
    """Start and stop of transmission so the pass meets ``requirement``.

    A ratio requirement gives a speed-independent stretch of track; an
    amount requirement widens the stretch as ``v`` grows.
    """
    v = check_velocity(v)
    if isinstance(geometry, CurveRail):
        plan = _place_curve(params, geometry, requirement, v, trunc, cfg, bracket_tol, 0, bs_x, None)
        if not plan.stations:
            raise InfeasibleRequirementError("requirement cannot be met inside the rail domain")
        a, b = plan.stations[0].x_l, plan.stations[0].x_r
        # times from arc length, origin at the station abscissa
        from .geometry import ArcLengthMap

        phi = ArcLengthMap(geometry, bs_x, cfg)
        return TransmissionWindow(a, b, phi(a) / v, phi(b) / v, v)
    if isinstance(geometry, ArcRail):
        if isinstance(requirement, Ratio):
            theta = angle_from_ratio(params, geometry.R, requirement.eta, trunc, cfg, bracket_tol)
        else:
            theta = angle_from_amount(params, geometry.R, v, requirement.value, trunc, cfg,
                                      bracket_tol)
        half = 0.5 * theta * geometry.R
    else:
        if isinstance(requirement, Ratio):
            half = 0.5 * interval_from_ratio(params, requirement.eta, trunc, cfg, bracket_tol)
        else:
            half = 0.5 * interval_from_amount(params, v, requirement.value, trunc, cfg, bracket_tol)
    return TransmissionWindow(-half, half, -half / v, half / v, v)
