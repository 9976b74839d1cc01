"""Adaptive Simpson quadrature with error control.

The heavy lifting happens in the kernel module chosen by
:mod:`railservice._backend`. This module owns the configuration, the panel
layout around integrand peaks and the translation of kernel status codes
into exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the adaptive integrator.

    The integrator stops refining once the estimated error is below
    ``max(abs_tol, rel_tol * |result|)``.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_depth: int = 50

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_depth) < 1:
            raise DomainError("max_depth must be at least 1")


DEFAULT_QUADRATURE = QuadratureConfig()


def graded_edges(a: float, b: float, center: float, scale: float) -> np.ndarray:
    """Panel edges for an integrand peaked at ``center`` with width ``scale``.

    Edges sit at ``center`` and ``center +/- scale * 2**k``; only those
    strictly inside ``(a, b)`` are kept, plus ``a`` and ``b`` themselves. This
    keeps Simpson's first samples from stepping over a narrow peak on a long
    interval.
    """
    if b <= a:
        return np.array([a, b], dtype=float)
    reach = max(abs(a - center), abs(b - center))
    pts = [a, b]
    if a < center < b:
        pts.append(center)
    step = scale
    while step < reach:
        for p in (center - step, center + step):
            if a < p < b:
                pts.append(p)
        step *= 2.0
    return np.unique(np.asarray(pts, dtype=float))


def check_result(value: float, err: float, status: int, what: str = "integral") -> float:
    if status:
        raise ConvergenceError(f"{what} did not converge within max_depth", value, err)
    if not math.isfinite(value):
        raise DomainError(f"{what} is not finite")
    return value


def integrate(f: Callable[[float], float], a: float, b: float,
              cfg: QuadratureConfig = DEFAULT_QUADRATURE,
              breakpoints: Iterable[float] = ()) -> float:
    """Integrate a Python callable over ``[a, b]``.

    Args:
        f: Integrand, finite on ``[a, b]``.
        a: Lower limit.
        b: Upper limit, ``b >= a``.
        cfg: Tolerances.
        breakpoints: Extra panel edges, e.g. at kinks or peaks.

    Raises:
        ConvergenceError: If refinement exceeds ``cfg.max_depth``; the
            exception carries the partial estimate.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if b < a:
        raise DomainError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0
    pts = [a, b] + [p for p in breakpoints if a < p < b]
    edges = np.unique(np.asarray(pts, dtype=float))
    value, err, status = _backend.kernels.simpson_callable(
        f, edges, cfg.rel_tol, cfg.abs_tol, int(cfg.max_depth))
    return check_result(value, err, status)


def trapezoid(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> float:
    """Fixed-step composite trapezoid rule with ``n`` steps (vectorised ``f``).

    Used as an independent brute-force reference for the adaptive path.
    """
    x = np.linspace(a, b, n + 1)
    y = f(x)
    h = (b - a) / n
    return float(h * (y.sum() - 0.5 * (y[0] + y[-1])))
