"""Compare the compiled and pure-Python quadrature kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each workload runs under both backends; the table lists the best wall time
and the speed-up. Results must agree to the last few digits, which is
checked as well.
"""

from __future__ import annotations

import argparse
import time

from railservice import _backend
from railservice.channel import ChannelParams
from railservice.geometry import two_sine_curve
from railservice.placement import interval_from_ratio, place_by_amount, place_by_ratio
from railservice.service import arc_integral, curve_integral, line_integral

PARAMS = ChannelParams.from_snr0_db(25.0, 3.0, 50.0)
CURVE = two_sine_curve(50.0)


def line_batch():
    return sum(line_integral(PARAMS, -x, 2 * x) for x in range(50, 20050, 200))


def arc_batch():
    return sum(arc_integral(PARAMS, 2e5, -x, x) for x in range(50, 20050, 200))


def curve_batch():
    return sum(curve_integral(PARAMS, CURVE, bs, -10000.0, 10000.0) for bs in range(-5000, 5000, 100))


def interval_solve():
    _clear()
    return sum(interval_from_ratio(PARAMS, eta / 20) for eta in range(1, 20))


def ratio_plan():
    return sum(place_by_ratio(PARAMS, CURVE, 0.8, max_per_side=4).boundaries)


def amount_plan():
    return sum(place_by_amount(PARAMS, CURVE, 100.0, 23.0, max_per_side=4).boundaries)


WORKLOADS = [
    ("100 line integrals", line_batch),
    ("100 arc integrals", arc_batch),
    ("100 curve totals", curve_batch),
    ("19 interval solves", interval_solve),
    ("ratio plan, 9 stations", ratio_plan),
    ("amount plan, 9 stations", amount_plan),
]


def _clear():
    from railservice import service

    service.line_half_integral.cache_clear()
    service.arc_half_integral.cache_clear()


def best_time(fn, repeat):
    best, value = float("inf"), None
    for _ in range(repeat):
        _clear()
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _backend.compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    previous = _backend.BACKEND
    print(f"{'workload':<26}{'python [s]':>12}{'cython [s]':>12}{'speed-up':>10}  agree")
    try:
        for name, fn in WORKLOADS:
            _backend.set_backend("python")
            t_py, v_py = best_time(fn, args.repeat)
            _backend.set_backend("cython")
            t_cy, v_cy = best_time(fn, args.repeat)
            agree = abs(v_py - v_cy) <= 1e-9 * max(1.0, abs(v_cy))
            print(f"{name:<26}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x  {'yes' if agree else 'NO'}")
    finally:
        _backend.set_backend(previous)


if __name__ == "__main__":
    main()
