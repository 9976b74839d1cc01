"""Rail shapes, base-station distances and arc-length parameterisation.

Three rail shapes are supported:

* :class:`LineRail`: straight track, station at the foot of the perpendicular.
* :class:`ArcRail`: circular track of radius ``R``, station on the inner side.
* curve rails ``y = f(x)`` above a straight deployment axis, either analytic
  (:class:`AnalyticCurve`, :class:`SineSeriesCurve`) or surveyed
  (:class:`SampledCurve`, monotone cubic through the survey points).

Irregular rails are brought into the deployment frame by fitting a
least-squares line through surveyed points and shifting it ``d0`` below the
rail (:func:`fit_deployment_line`, :func:`to_deployment_frame`).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, FitError, ValidationError
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate

# below this R/d0 the "radius much larger than offset" assumption is shaky
ARC_RATIO_WARNING = 20.0


class GeometryWarning(UserWarning):
    """A geometric modelling assumption looks violated."""


def line_distance(d0: float, x: float) -> float:
    """Distance from the station to a train ``x`` metres along a straight rail."""
    return math.hypot(d0, x)


def arc_distance(R: float, d0: float, s: float) -> float:
    """Distance from the station to a train ``s`` metres of arc from the nearest point.

    Uses ``d^2 = d0^2 + 4 R Rs sin^2(s / 2R)``, which equals the law of cosines
    form but does not cancel catastrophically when ``R >> d0``.
    """
    if not R > d0:
        raise DomainError(f"arc radius {R} must exceed station offset {d0}")
    h = math.sin(0.5 * s / R)
    return math.sqrt(d0 * d0 + 4.0 * R * (R - d0) * h * h)


@dataclass(frozen=True)
class LineRail:
    """Straight rail; the along-track origin is the foot of the perpendicular."""

    kind = "line"

    def distance(self, d0: float, x: float) -> float:
        return line_distance(d0, x)


@dataclass(frozen=True)
class ArcRail:
    """Circular rail of radius ``R`` with the station ``d0`` inside the arc."""

    R: float
    d0: float

    kind = "arc"

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > self.d0 > 0):
            raise DomainError(f"need R > d0 > 0, got R={self.R}, d0={self.d0}")
        if self.R < ARC_RATIO_WARNING * self.d0:
            warnings.warn(
                f"arc radius {self.R} m is less than {ARC_RATIO_WARNING:g} x d0 ({self.d0} m); "
                "service may not be contained in the arc",
                GeometryWarning,
                stacklevel=2,
            )

    @property
    def Rs(self) -> float:
        """Distance from the arc centre to the base station."""
        return self.R - self.d0

    def distance(self, s: float) -> float:
        return arc_distance(self.R, self.d0, s)


class CurveRail:
    """Rail ``y = f(x)`` over ``[x_l, x_r]`` in the deployment frame.

    Base stations sit on the x axis. Subclasses provide ``f`` and its
    derivative ``df``.
    """

    kind = "curve"

    def __init__(self, domain: tuple[float, float]):
        x_l, x_r = float(domain[0]), float(domain[1])
        if not (math.isfinite(x_l) and math.isfinite(x_r) and x_l < x_r):
            raise ValidationError(f"curve domain must satisfy x_l < x_r, got {domain}", "domain")
        self.domain = (x_l, x_r)

    def f(self, x: float) -> float:
        raise NotImplementedError

    def df(self, x: float) -> float:
        raise NotImplementedError

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.domain[0] - slack <= x <= self.domain[1] + slack

    def distance(self, bs_x: float, x: float) -> float:
        """Distance from a station at ``(bs_x, 0)`` to the rail point above ``x``."""
        if not self.contains(x):
            raise DomainError(f"x={x} outside curve domain {self.domain}")
        return math.hypot(x - bs_x, self.f(x))

    def speed(self, x: float) -> float:
        """Arc length per unit abscissa, ``sqrt(1 + f'(x)^2)``."""
        d = self.df(x)
        return math.sqrt(1.0 + d * d)

    def _check_positive(self, n: int = 2001) -> None:
        xs = np.linspace(self.domain[0], self.domain[1], n)
        ys = np.array([self.f(x) for x in xs])
        if not np.all(np.isfinite(ys)):
            raise ValidationError("curve is not finite on its domain", "curve")
        bad = np.flatnonzero(ys <= 0)
        if bad.size:
            raise ValidationError(
                f"rail must lie strictly above the deployment axis; f <= 0 near x={xs[bad[0]]:.6g}",
                "curve")


class AnalyticCurve(CurveRail):
    """Curve from Python callables.

    If ``df`` is omitted the derivative is taken by central differences.
    """

    def __init__(self, f: Callable[[float], float], domain: tuple[float, float],
                 df: Callable[[float], float] | None = None):
        super().__init__(domain)
        self._f = f
        self._df = df
        span = self.domain[1] - self.domain[0]
        self._h = 1e-6 * max(span, 1.0)
        self._check_positive()

    def f(self, x: float) -> float:
        return float(self._f(x))

    def df(self, x: float) -> float:
        if self._df is not None:
            return float(self._df(x))
        h = self._h
        return (self._f(x + h) - self._f(x - h)) / (2.0 * h)


class SineSeriesCurve(CurveRail):
    """``f(x) = offset + sum_i amp_i * sin(wave_i * x + phase_i)``."""

    def __init__(self, offset: float, amplitudes: Sequence[float], wavenumbers: Sequence[float],
                 domain: tuple[float, float], phases: Sequence[float] | None = None):
        super().__init__(domain)
        self.offset = float(offset)
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.wavenumbers = np.asarray(wavenumbers, dtype=float)
        self.phases = (np.zeros_like(self.amplitudes) if phases is None
                       else np.asarray(phases, dtype=float))
        if not (self.amplitudes.shape == self.wavenumbers.shape == self.phases.shape):
            raise ValidationError("amplitudes, wavenumbers and phases must have equal length")
        self._terms = list(zip(self.amplitudes.tolist(), self.wavenumbers.tolist(),
                               self.phases.tolist()))
        if self.offset - float(np.abs(self.amplitudes).sum()) <= 0:
            self._check_positive()

    def f(self, x: float) -> float:
        y = self.offset
        for amp, k, ph in self._terms:
            y += amp * math.sin(k * x + ph)
        return y

    def df(self, x: float) -> float:
        dy = 0.0
        for amp, k, ph in self._terms:
            dy += amp * k * math.cos(k * x + ph)
        return dy


class SampledCurve(CurveRail):
    """Monotone cubic (PCHIP) interpolant through surveyed deployment-frame points."""

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValidationError("need at least two (x, y) samples of equal length", "points")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValidationError("samples must be finite", "points")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("sample abscissae must be strictly increasing "
                                  "(rail must be a graph over the deployment axis)", "points")
        bad = np.flatnonzero(ys <= 0)
        if bad.size:
            raise ValidationError(f"rail points must lie above the deployment axis; "
                                  f"offending indices {bad.tolist()}", "points")
        super().__init__((xs[0], xs[-1]))
        self.x = xs
        self.y = ys
        self._pchip = PchipInterpolator(xs, ys, extrapolate=True)
        self._dpchip = self._pchip.derivative()

    @property
    def knots(self) -> np.ndarray:
        return self._pchip.x

    @property
    def coefficients(self) -> np.ndarray:
        """Local cubic coefficients, shape ``(4, n - 1)``, highest power first."""
        return self._pchip.c

    def f(self, x: float) -> float:
        return float(self._pchip(x))

    def df(self, x: float) -> float:
        return float(self._dpchip(x))


def two_sine_curve(d0: float = 50.0, domain: tuple[float, float] = (-10000.0, 10000.0)
                   ) -> SineSeriesCurve:
    """Gently undulating reference rail ``2 sin(4e-4 pi x) + 3 sin(4e-5 pi x) + d0``."""
    return SineSeriesCurve(offset=d0, amplitudes=(2.0, 3.0),
                           wavenumbers=(4e-4 * math.pi, 4e-5 * math.pi), domain=domain)


class ArcLengthMap:
    """Cumulative arc length ``phi(x)`` of a curve rail and its inverse.

    ``phi`` is tabulated on a uniform node grid with adaptive quadrature;
    values between nodes integrate from the nearest node below. The inverse
    bisects inside the bracketing grid cell.
    """

    def __init__(self, curve: CurveRail, x_ref: float = 0.0, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 nodes: int = 257):
        if not curve.contains(x_ref):
            raise DomainError(f"reference abscissa {x_ref} outside curve domain {curve.domain}")
        self.curve = curve
        self.x_ref = float(x_ref)
        self.cfg = cfg
        grid = np.unique(np.append(np.linspace(curve.domain[0], curve.domain[1], nodes), x_ref))
        speeds = np.array([curve.speed(x) for x in grid])
        if not np.all(np.isfinite(speeds)):
            raise ValidationError("curve derivative is not finite on the arc-length grid", "curve")
        seg = np.array([integrate(curve.speed, a, b, cfg) for a, b in zip(grid[:-1], grid[1:])])
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        cum -= cum[np.searchsorted(grid, x_ref)]
        self._grid = grid
        self._cum = cum

    @property
    def length(self) -> float:
        return float(self._cum[-1] - self._cum[0])

    def derivative(self, x: float) -> float:
        return self.curve.speed(x)

    def __call__(self, x: float) -> float:
        if not self.curve.contains(x):
            raise DomainError(f"x={x} outside curve domain {self.curve.domain}")
        i = int(np.searchsorted(self._grid, x, side="right")) - 1
        i = min(max(i, 0), len(self._grid) - 2)
        x0 = self._grid[i]
        if x == x0:
            return float(self._cum[i])
        return float(self._cum[i]) + integrate(self.curve.speed, x0, x, self.cfg)

    def inverse(self, s: float, tol: float = 1e-10) -> float:
        """Abscissa whose arc length from ``x_ref`` equals ``s``."""
        if not (self._cum[0] - 1e-12 <= s <= self._cum[-1] + 1e-12):
            raise DomainError(f"arc length {s} outside [{self._cum[0]}, {self._cum[-1]}]")
        i = int(np.searchsorted(self._cum, s, side="right")) - 1
        i = min(max(i, 0), len(self._grid) - 2)
        lo, hi = float(self._grid[i]), float(self._grid[i + 1])
        base = float(self._cum[i])
        if s <= base:
            return lo
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if base + integrate(self.curve.speed, self._grid[i], mid, self.cfg) < s:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def arc_length_map(curve: CurveRail, x_ref: float = 0.0,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> ArcLengthMap:
    return ArcLengthMap(curve, x_ref, cfg)


@dataclass(frozen=True)
class DeploymentLine:
    """Least-squares rail line ``y = slope*x + intercept`` and the station line below it.

    Stations are deployed along ``y = slope*x + shifted_intercept``, which is
    parallel to the fit and ``d0`` metres from it.
    """

    slope: float
    intercept: float
    shifted_intercept: float
    d0: float
    below: tuple[int, ...] = field(default=())

    @property
    def coefficients(self) -> tuple[float, float]:
        return self.slope, self.shifted_intercept


def fit_deployment_line(points: Sequence[Sequence[float]] | np.ndarray, d0: float) -> DeploymentLine:
    """Fit a line through survey points and shift it ``d0`` below the rail.

    Points that fall on or below the shifted line are reported through a
    :class:`GeometryWarning` and in ``DeploymentLine.below``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise FitError("need at least two (x, y) points", "points")
    if not np.all(np.isfinite(pts)):
        raise FitError("points must be finite", "points")
    if not d0 >= 0:
        raise DomainError(f"d0 must be non-negative, got {d0}")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx <= 1e-12 * max(1.0, float(np.max(np.abs(x)))) ** 2:
        raise FitError("points are vertically aligned; no least-squares line y = ax + b exists",
                       "points")
    a = float(np.sum((x - xm) * (y - ym))) / sxx
    b = float(ym - a * xm)
    b_shift = b - d0 * math.sqrt(1.0 + a * a)
    below = tuple(int(i) for i in np.flatnonzero(y <= a * x + b_shift))
    if below:
        warnings.warn(f"{len(below)} rail point(s) lie on or below the deployment line: "
                      f"indices {list(below)}", GeometryWarning, stacklevel=2)
    return DeploymentLine(slope=a, intercept=b, shifted_intercept=b_shift, d0=float(d0), below=below)


def deployment_transform(points: Sequence[Sequence[float]] | np.ndarray, line: DeploymentLine,
                         origin_x: float = 0.0) -> np.ndarray:
    """Rigidly map survey-frame points into the deployment frame.

    The deployment line becomes the x axis, oriented with increasing survey
    ``x``, and the point of the line above ``origin_x`` becomes the origin.
    """
    pts = np.asarray(points, dtype=float)
    a = line.slope
    norm = math.sqrt(1.0 + a * a)
    ux, uy = 1.0 / norm, a / norm
    nx, ny = -a / norm, 1.0 / norm
    ox, oy = origin_x, a * origin_x + line.shifted_intercept
    dx, dy = pts[:, 0] - ox, pts[:, 1] - oy
    return np.column_stack([dx * ux + dy * uy, dx * nx + dy * ny])


def to_deployment_frame(points: Sequence[Sequence[float]] | np.ndarray, line: DeploymentLine,
                        origin_x: float = 0.0) -> SampledCurve:
    """Survey points -> :class:`SampledCurve` in the deployment frame.

    Raises:
        ValidationError: If a transformed point is on or below the axis, or
            the rail doubles back over the deployment axis.
    """
    frame = deployment_transform(points, line, origin_x)
    order = np.argsort(frame[:, 0], kind="stable")
    frame = frame[order]
    bad = np.flatnonzero(frame[:, 1] <= 0)
    if bad.size:
        raise ValidationError(f"transformed rail points on or below the deployment axis: "
                              f"indices {sorted(order[bad].tolist())}", "points")
    return SampledCurve(frame[:, 0], frame[:, 1])


def read_survey_csv(path: str | Path) -> np.ndarray:
    """Read survey points from a CSV with header ``x,y`` (metres)."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"survey file not found: {path}", "points")
    rows = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        fields = [c.strip() for c in (reader.fieldnames or [])]
        if "x" not in fields or "y" not in fields:
            raise ValidationError(f"{path}: header must contain columns x,y", "points")
        reader.fieldnames = fields
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append((float(row["x"]), float(row["y"])))
            except (TypeError, ValueError):
                raise ValidationError(f"{path}:{lineno}: non-numeric value", "points") from None
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two points", "points")
    return np.asarray(rows, dtype=float)
