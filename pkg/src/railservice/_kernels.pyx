# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quadrature kernels.

Same functions, argument order and driver as ``_purekernels``; the integrand
for the fixed geometries is evaluated in C without touching Python objects.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, pow, sin, cos, sqrt, fabs, log
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MIN_DEPTH = 4

cdef enum Kind:
    LINE = 0
    ARC = 1
    SINE = 2
    PCHIP = 3

cdef struct Params:
    int kind
    double gamma
    double half
    double d0sq
    double scale
    double inv2r
    double bs
    double offset
    int nterms
    double *amps
    double *waves
    double *phases
    int nknots
    double *knots
    double *c0
    double *c1
    double *c2
    double *c3

cdef struct Item:
    double a, b, fa, fm, fb, whole, tol
    int depth

cdef double LN2 = log(2.0)


cdef inline double _eval(double x, Params *p) noexcept nogil:
    cdef double h, y, dy, arg, dx, t
    cdef int i, lo, hi, mid
    if p.kind == LINE:
        return log1p(p.gamma * pow(p.d0sq + x * x, p.half)) / LN2
    if p.kind == ARC:
        h = sin(x * p.inv2r)
        return log1p(p.gamma * pow(p.d0sq + p.scale * h * h, p.half)) / LN2
    if p.kind == SINE:
        y = p.offset
        dy = 0.0
        for i in range(p.nterms):
            arg = p.waves[i] * x + p.phases[i]
            y += p.amps[i] * sin(arg)
            dy += p.amps[i] * p.waves[i] * cos(arg)
        dx = x - p.bs
        return log1p(p.gamma * pow(dx * dx + y * y, p.half)) / LN2 * sqrt(1.0 + dy * dy)
    # PCHIP
    lo = 0
    hi = p.nknots - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if p.knots[mid] <= x:
            lo = mid
        else:
            hi = mid - 1
    t = x - p.knots[lo]
    y = ((p.c0[lo] * t + p.c1[lo]) * t + p.c2[lo]) * t + p.c3[lo]
    dy = (3.0 * p.c0[lo] * t + 2.0 * p.c1[lo]) * t + p.c2[lo]
    dx = x - p.bs
    return log1p(p.gamma * pow(dx * dx + y * y, p.half)) / LN2 * sqrt(1.0 + dy * dy)


cdef tuple _drive_c(Params *p, double[::1] edges, double rel_tol, double abs_tol,
                    int max_depth):
    cdef Py_ssize_t n = edges.shape[0] - 1
    cdef Py_ssize_t i
    cdef int top, status = 0
    cdef double a, b, m, fa, fb, fm, flm, frm, whole, left, right, delta, tol
    cdef double estimate = 0.0, total = 0.0, err = 0.0
    cdef Item it
    cdef Item *panels
    cdef Item *stack
    if n < 1:
        return 0.0, 0.0, 0
    panels = <Item *> malloc(n * sizeof(Item))
    stack = <Item *> malloc((max_depth + 4) * sizeof(Item))
    if panels == NULL or stack == NULL:
        free(panels)
        free(stack)
        raise MemoryError()
    with nogil:
        for i in range(n):
            a = edges[i]
            b = edges[i + 1]
            fa = _eval(a, p)
            fb = _eval(b, p)
            fm = _eval(0.5 * (a + b), p)
            whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
            estimate += whole
            panels[i].a = a
            panels[i].b = b
            panels[i].fa = fa
            panels[i].fm = fm
            panels[i].fb = fb
            panels[i].whole = whole
        tol = max(abs_tol, rel_tol * fabs(estimate)) / n
        for i in range(n):
            stack[0] = panels[i]
            stack[0].tol = tol
            stack[0].depth = 0
            top = 1
            while top > 0:
                top -= 1
                it = stack[top]
                m = 0.5 * (it.a + it.b)
                flm = _eval(0.5 * (it.a + m), p)
                frm = _eval(0.5 * (m + it.b), p)
                left = (m - it.a) / 6.0 * (it.fa + 4.0 * flm + it.fm)
                right = (it.b - m) / 6.0 * (it.fm + 4.0 * frm + it.fb)
                delta = left + right - it.whole
                if it.depth >= MIN_DEPTH and fabs(delta) <= 15.0 * it.tol:
                    total += left + right + delta / 15.0
                    err += fabs(delta) / 15.0
                elif it.depth >= max_depth:
                    total += left + right + delta / 15.0
                    err += fabs(delta) / 15.0
                    status = 1
                else:
                    stack[top].a = m
                    stack[top].b = it.b
                    stack[top].fa = it.fm
                    stack[top].fm = frm
                    stack[top].fb = it.fb
                    stack[top].whole = right
                    stack[top].tol = 0.5 * it.tol
                    stack[top].depth = it.depth + 1
                    top += 1
                    stack[top].a = it.a
                    stack[top].b = m
                    stack[top].fa = it.fa
                    stack[top].fm = flm
                    stack[top].fb = it.fm
                    stack[top].whole = left
                    stack[top].tol = 0.5 * it.tol
                    stack[top].depth = it.depth + 1
                    top += 1
    free(panels)
    free(stack)
    return total, err, status


cdef double[::1] _as_edges(edges):
    return np.ascontiguousarray(edges, dtype=np.float64)


def simpson_line(double gamma, double alpha, double d0, edges, double rel_tol,
                 double abs_tol, int max_depth):
    cdef Params p
    p.kind = LINE
    p.gamma = gamma
    p.half = -0.5 * alpha
    p.d0sq = d0 * d0
    return _drive_c(&p, _as_edges(edges), rel_tol, abs_tol, max_depth)


def simpson_arc(double gamma, double alpha, double d0, double radius, edges,
                double rel_tol, double abs_tol, int max_depth):
    cdef Params p
    p.kind = ARC
    p.gamma = gamma
    p.half = -0.5 * alpha
    p.d0sq = d0 * d0
    p.scale = 4.0 * radius * (radius - d0)
    p.inv2r = 0.5 / radius
    return _drive_c(&p, _as_edges(edges), rel_tol, abs_tol, max_depth)


def simpson_sine_curve(double gamma, double alpha, double bs, double offset,
                       amps, waves, phases, edges, double rel_tol,
                       double abs_tol, int max_depth):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(waves, dtype=np.float64)
    cdef double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef Params p
    p.kind = SINE
    p.gamma = gamma
    p.half = -0.5 * alpha
    p.bs = bs
    p.offset = offset
    p.nterms = a.shape[0]
    p.amps = &a[0] if p.nterms else NULL
    p.waves = &w[0] if p.nterms else NULL
    p.phases = &ph[0] if p.nterms else NULL
    return _drive_c(&p, _as_edges(edges), rel_tol, abs_tol, max_depth)


def simpson_pchip_curve(double gamma, double alpha, double bs, knots, coeffs,
                        edges, double rel_tol, double abs_tol, int max_depth):
    cdef double[::1] k = np.ascontiguousarray(knots, dtype=np.float64)
    c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef double[::1] c0 = np.ascontiguousarray(c[0])
    cdef double[::1] c1 = np.ascontiguousarray(c[1])
    cdef double[::1] c2 = np.ascontiguousarray(c[2])
    cdef double[::1] c3 = np.ascontiguousarray(c[3])
    cdef Params p
    p.kind = PCHIP
    p.gamma = gamma
    p.half = -0.5 * alpha
    p.bs = bs
    p.nknots = k.shape[0]
    p.knots = &k[0]
    p.c0 = &c0[0]
    p.c1 = &c1[0]
    p.c2 = &c2[0]
    p.c3 = &c3[0]
    return _drive_c(&p, _as_edges(edges), rel_tol, abs_tol, max_depth)


def simpson_callable(f, edges, double rel_tol, double abs_tol, int max_depth):
    cdef double[::1] e = _as_edges(edges)
    cdef Py_ssize_t n = e.shape[0] - 1
    cdef Py_ssize_t i
    cdef int depth, status = 0
    cdef double a, b, m, fa, fb, fm, flm, frm, whole, left, right, delta, tol, t
    cdef double estimate = 0.0, total = 0.0, err = 0.0
    if n < 1:
        return 0.0, 0.0, 0
    panels = []
    for i in range(n):
        a = e[i]
        b = e[i + 1]
        fa = f(a)
        fb = f(b)
        fm = f(0.5 * (a + b))
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        estimate += whole
        panels.append((a, b, fa, fm, fb, whole))
    tol = max(abs_tol, rel_tol * fabs(estimate)) / n
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
            if depth >= MIN_DEPTH and fabs(delta) <= 15.0 * t:
                total += left + right + delta / 15.0
                err += fabs(delta) / 15.0
            elif depth >= max_depth:
                total += left + right + delta / 15.0
                err += fabs(delta) / 15.0
                status = 1
            else:
                stack.append((m, b, fm, frm, fb, right, 0.5 * t, depth + 1))
                stack.append((a, m, fa, flm, fm, left, 0.5 * t, depth + 1))
    return total, err, status
