"""Pure-Python quadrature kernels.

Mirror of the compiled ``_kernels`` extension. Both modules expose the same
functions with the same argument order and run the same iterative adaptive
Simpson driver, so results agree to rounding.

Every kernel returns ``(value, error_estimate, status)`` where ``status`` is
0 on convergence and 1 when some subinterval hit ``max_depth``.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

BACKEND = "python"

_LN2 = math.log(2.0)
_MIN_DEPTH = 4


def _drive(f: Callable[[float], float], edges: Sequence[float], rel_tol: float,
           abs_tol: float, max_depth: int) -> tuple[float, float, int]:
    n = len(edges) - 1
    if n < 1:
        return 0.0, 0.0, 0
    panels = []
    estimate = 0.0
    for i in range(n):
        a = float(edges[i])
        b = float(edges[i + 1])
        fa = f(a)
        fb = f(b)
        fm = f(0.5 * (a + b))
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        estimate += whole
        panels.append((a, b, fa, fm, fb, whole))
    tol = max(abs_tol, rel_tol * abs(estimate)) / n

    total = 0.0
    err = 0.0
    status = 0
    for a, b, fa, fm, fb, whole in panels:
        stack = [(a, b, fa, fm, fb, whole, tol, 0)]
        while stack:
            a, b, fa, fm, fb, whole, t, depth = stack.pop()
            m = 0.5 * (a + b)
            flm = f(0.5 * (a + m))
            frm = f(0.5 * (m + b))
            left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
            right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
            delta = left + right - whole
            if depth >= _MIN_DEPTH and abs(delta) <= 15.0 * t:
                total += left + right + delta / 15.0
                err += abs(delta) / 15.0
            elif depth >= max_depth:
                total += left + right + delta / 15.0
                err += abs(delta) / 15.0
                status = 1
            else:
                stack.append((m, b, fm, frm, fb, right, 0.5 * t, depth + 1))
                stack.append((a, m, fa, flm, fm, left, 0.5 * t, depth + 1))
    return total, err, status


def simpson_callable(f, edges, rel_tol, abs_tol, max_depth):
    return _drive(f, edges, rel_tol, abs_tol, max_depth)


def simpson_line(gamma, alpha, d0, edges, rel_tol, abs_tol, max_depth):
    half = -0.5 * alpha
    d0sq = d0 * d0
    log1p = math.log1p

    def f(x):
        return log1p(gamma * (d0sq + x * x) ** half) / _LN2

    return _drive(f, edges, rel_tol, abs_tol, max_depth)


def simpson_arc(gamma, alpha, d0, radius, edges, rel_tol, abs_tol, max_depth):
    half = -0.5 * alpha
    d0sq = d0 * d0
    scale = 4.0 * radius * (radius - d0)
    inv2r = 0.5 / radius
    log1p = math.log1p
    sin = math.sin

    def f(s):
        h = sin(s * inv2r)
        return log1p(gamma * (d0sq + scale * h * h) ** half) / _LN2

    return _drive(f, edges, rel_tol, abs_tol, max_depth)


def simpson_sine_curve(gamma, alpha, bs, offset, amps, waves, phases, edges,
                       rel_tol, abs_tol, max_depth):
    half = -0.5 * alpha
    terms = list(zip([float(v) for v in amps], [float(v) for v in waves],
                     [float(v) for v in phases]))
    log1p = math.log1p
    sin = math.sin
    cos = math.cos
    sqrt = math.sqrt

    def f(x):
        y = offset
        dy = 0.0
        for amp, k, ph in terms:
            arg = k * x + ph
            y += amp * sin(arg)
            dy += amp * k * cos(arg)
        dx = x - bs
        return log1p(gamma * (dx * dx + y * y) ** half) / _LN2 * sqrt(1.0 + dy * dy)

    return _drive(f, edges, rel_tol, abs_tol, max_depth)


def simpson_pchip_curve(gamma, alpha, bs, knots, coeffs, edges, rel_tol,
                        abs_tol, max_depth):
    half = -0.5 * alpha
    xs = [float(v) for v in knots]
    c = [[float(v) for v in row] for row in coeffs]
    last = len(xs) - 2
    log1p = math.log1p
    sqrt = math.sqrt

    def f(x):
        # binary search for the segment, clamped to the end pieces
        lo, hi = 0, last
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        t = x - xs[lo]
        c0, c1, c2, c3 = c[0][lo], c[1][lo], c[2][lo], c[3][lo]
        y = ((c0 * t + c1) * t + c2) * t + c3
        dy = (3.0 * c0 * t + 2.0 * c1) * t + c2
        dx = x - bs
        return log1p(gamma * (dx * dx + y * y) ** half) / _LN2 * sqrt(1.0 + dy * dy)

    return _drive(f, edges, rel_tol, abs_tol, max_depth)
