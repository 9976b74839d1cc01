"""Command-line front end: ``railservice <command> --config scenario.json``.

Commands write their tables into ``--out`` (default: the config's
``outputs.dir``) and print a one-line summary. Every run also drops a
``provenance.json`` holding the normalised configuration, which loads back
as an equivalent config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .channel import capacity_at_distance, min_rate_for_interval
from .config import ScenarioConfig
from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleRequirementError,
    NoRootError,
    TruncationError,
    ValidationError,
)
from .geometry import (
    ArcLengthMap,
    ArcRail,
    CurveRail,
    LineRail,
    deployment_transform,
    fit_deployment_line,
    read_survey_csv,
)
from .placement import (
    Ratio,
    _place_curve,
    angle_from_amount,
    angle_from_ratio,
    interval_from_amount,
    interval_from_ratio,
    onoff_window,
    place_uniform,
)
from .service import (
    arc_integral,
    curve_integral,
    curve_support,
    curve_total_integral,
    line_cumulative,
    line_integral,
    ratio_arc,
    ratio_line,
    service_up_to,
    x_infinity_arc,
    x_infinity_line,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGENCE = 4


# -- output helpers -------------------------------------------------------------

def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"refusing to write non-finite value {value}")
        return repr(value)
    return str(value)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _write_table(out: Path, stem: str, formats: Sequence[str], header: Sequence[str],
                 rows: Sequence[Sequence[Any]]) -> list[Path]:
    written = []
    if "csv" in formats:
        written.append(_write(out, f"{stem}.csv", _csv_text(header, rows)))
    if "json" in formats:
        records = [dict(zip(header, row)) for row in rows]
        written.append(_write(out, f"{stem}.json", _json_text(records)))
    return written


# -- sweeps -----------------------------------------------------------------------

def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    """Parse ``KEY=lo:hi:n`` into a dotted key and ``n`` linearly spaced values."""
    try:
        key, rng = text.split("=", 1)
        lo_s, hi_s, n_s = rng.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise ValidationError(f"expected KEY=lo:hi:n, got {text!r}", "--sweep") from None
    if not key or "." not in key:
        raise ValidationError("sweep key must be a dotted config path such as train.v", "--sweep")
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("sweep needs finite bounds and n >= 1", "--sweep")
    return key, np.linspace(lo, hi, n)


def _scenarios(cfg: ScenarioConfig, sweep: str | None) -> list[tuple[dict, ScenarioConfig]]:
    if sweep is None:
        return [({}, cfg)]
    key, values = parse_sweep(sweep)
    return [({key: float(val)}, cfg.with_value(key, float(val))) for val in values]


# -- commands ------------------------------------------------------------------------

TRACE_HEADER = ["t_s", "x_m", "capacity_bits_per_s_per_hz", "cumulative_service_bits_per_hz"]


def trace_rows(cfg: ScenarioConfig) -> list[list[float]]:
    """Uniform-in-time samples of capacity and accumulated service for one pass.

    The window covers the capacity support, ``[-x_inf/v, x_inf/v]`` on a
    straight rail; on curve rails it is clipped to the rail domain. Service
    accumulates segment by segment so the last row approaches the total.
    """
    params = cfg.channel()
    v = cfg.velocity()
    geom = cfg.build_geometry()
    trunc, quad = cfg.truncation(), cfg.quadrature()
    n = cfg.numerics.trace_points
    if isinstance(geom, LineRail):
        x_inf = x_infinity_line(params, trunc)
        xs = v * np.linspace(-x_inf / v, x_inf / v, n)
        xs[n // 2] = 0.0 if n % 2 else xs[n // 2]
        dist = lambda x: math.hypot(params.d0, x)
        seg = lambda a, b: line_integral(params, a, b, quad)
        start = service_up_to(params, v, xs[0] / v, trunc, quad) * v
        ts = xs / v
    elif isinstance(geom, ArcRail):
        s_inf = x_infinity_arc(params, geom.R, trunc)
        xs = np.linspace(-s_inf, s_inf, n)
        dist = geom.distance
        seg = lambda a, b: arc_integral(params, geom.R, a, b, quad)
        start = 0.0
        ts = xs / v
    else:
        bs = cfg.first_station(geom)
        lo, hi, _ = curve_support(params, geom, bs, trunc)
        phi = ArcLengthMap(geom, bs, quad)
        s_lo, s_hi = phi(lo), phi(hi)
        ts = np.linspace(s_lo / v, s_hi / v, n)
        xs = np.array([lo] + [phi.inverse(v * t) for t in ts[1:-1]] + [hi])
        dist = lambda x: geom.distance(bs, x)
        seg = lambda a, b: curve_integral(params, geom, bs, a, b, quad)
        start = 0.0
    rows = []
    acc = start
    prev = None
    for t, x in zip(ts, xs):
        x = float(x)
        if prev is not None:
            acc += seg(prev, x)
        prev = x
        rows.append([float(t), x, capacity_at_distance(params, dist(x)), acc / v])
    return rows


def interval_report(cfg: ScenarioConfig) -> dict:
    """Single-station interval, minimum rate at its edge, ratio and service."""
    params = cfg.channel()
    geom = cfg.build_geometry()
    req = cfg.requirement()
    trunc, quad, tol = cfg.truncation(), cfg.quadrature(), cfg.numerics.bracket_tol
    v = cfg.v
    if not isinstance(req, Ratio) and v is None:
        cfg.velocity()
    rep: dict[str, Any] = {"geometry": cfg.geometry.type}
    if isinstance(geom, LineRail):
        if isinstance(req, Ratio):
            d_s = interval_from_ratio(params, req.eta, trunc, quad, tol)
        else:
            d_s = interval_from_amount(params, v, req.value, trunc, quad, tol)
        eta = ratio_line(params, d_s, trunc, quad)
        inside = 2.0 * line_cumulative(params, 0.5 * d_s, trunc, quad)
        rep["theta_rad"] = None
        r_m = min_rate_for_interval(params, d_s)
    elif isinstance(geom, ArcRail):
        if isinstance(req, Ratio):
            theta = angle_from_ratio(params, geom.R, req.eta, trunc, quad, tol)
        else:
            theta = angle_from_amount(params, geom.R, v, req.value, trunc, quad, tol)
        d_s = theta * geom.R
        eta = ratio_arc(params, geom.R, theta, trunc, quad)
        inside = arc_integral(params, geom.R, -0.5 * d_s, 0.5 * d_s, quad)
        rep["theta_rad"] = theta
        r_m = capacity_at_distance(params, geom.distance(0.5 * d_s))
    else:
        bs = cfg.first_station(geom)
        plan = _place_curve(params, geom, req, v, trunc, quad, tol, 0, bs,
                            cfg.numerics.scan_step)
        if not plan.stations:
            raise InfeasibleRequirementError("requirement cannot be met inside the rail domain")
        st = plan.stations[0]
        d_s = st.width
        inside = curve_integral(params, geom, bs, st.x_l, st.x_r, quad)
        eta = inside / curve_total_integral(params, geom, bs, trunc, quad)
        rep["theta_rad"] = None
        r_m = min(capacity_at_distance(params, geom.distance(bs, st.x_l)),
                  capacity_at_distance(params, geom.distance(bs, st.x_r)))
    rep.update(
        requirement="ratio" if isinstance(req, Ratio) else "amount",
        requirement_value=req.eta if isinstance(req, Ratio) else req.value,
        v_m_per_s=v,
        d_s_m=d_s,
        min_rate_bits_per_s_per_hz=r_m,
        ratio=eta,
        service_bits_per_hz=None if v is None else inside / v,
    )
    return rep


INTERVAL_KEYS = ["geometry", "requirement", "requirement_value", "v_m_per_s", "d_s_m", "theta_rad",
                 "min_rate_bits_per_s_per_hz", "ratio", "service_bits_per_hz"]

ONOFF_KEYS = ["v_m_per_s", "start_x_m", "stop_x_m", "width_m", "start_t_s", "stop_t_s",
              "duration_s"]


def onoff_report(cfg: ScenarioConfig) -> dict:
    params = cfg.channel()
    geom = cfg.build_geometry()
    w = onoff_window(params, geom, cfg.requirement(), cfg.velocity(), cfg.truncation(),
                     cfg.quadrature(), cfg.numerics.bracket_tol, cfg.first_station(geom))
    return {"v_m_per_s": w.v, "start_x_m": w.start_x, "stop_x_m": w.stop_x, "width_m": w.width,
            "start_t_s": w.start_t, "stop_t_s": w.stop_t, "duration_s": w.duration}


def build_plan(cfg: ScenarioConfig):
    params = cfg.channel()
    geom = cfg.build_geometry()
    req = cfg.requirement()
    trunc, quad, num = cfg.truncation(), cfg.quadrature(), cfg.numerics
    if isinstance(geom, CurveRail):
        if not isinstance(req, Ratio):
            cfg.velocity()
        return _place_curve(params, geom, req, cfg.v, trunc, quad, num.bracket_tol,
                            num.stations_per_side, cfg.first_station(geom), num.scan_step)
    per_side = 5 if num.stations_per_side is None else num.stations_per_side
    return place_uniform(params, geom, req, cfg.v, per_side, trunc, quad, num.bracket_tol)


def _provenance(cfg: ScenarioConfig, command: str) -> dict:
    return {"command": command, "config": cfg.to_dict(), "version": __version__}


def cmd_trace(cfg: ScenarioConfig, out: Path, formats, sweep) -> str:
    runs = _scenarios(cfg, sweep)
    for i, (point, sc) in enumerate(runs):
        stem = "trace" if not sweep else f"trace_{i:03d}"
        rows = trace_rows(sc)
        _write_table(out, stem, formats, TRACE_HEADER, rows)
    last = rows[-1]
    return f"trace: {len(rows)} rows, final cumulative service {last[3]:.9g} bits/Hz"


def _report_table(cfg, out, formats, sweep, fn, keys, stem) -> list[dict]:
    reports = []
    for point, sc in _scenarios(cfg, sweep):
        rep = fn(sc)
        for k, val in point.items():
            rep[f"sweep:{k}"] = val
        reports.append(rep)
    sweep_keys = [k for k in reports[0] if k.startswith("sweep:")]
    header = sweep_keys + keys
    _write_table(out, stem, formats, header, [[r.get(k) for k in header] for r in reports])
    return reports


def cmd_interval(cfg, out, formats, sweep) -> str:
    reps = _report_table(cfg, out, formats, sweep, interval_report, INTERVAL_KEYS, "interval")
    r = reps[-1]
    return " ".join(f"{k}={_fmt(r[k]) or '-'}" for k in INTERVAL_KEYS)


def cmd_onoff(cfg, out, formats, sweep) -> str:
    reps = _report_table(cfg, out, formats, sweep, onoff_report, ONOFF_KEYS, "onoff")
    r = reps[-1]
    return " ".join(f"{k}={_fmt(r[k])}" for k in ONOFF_KEYS)


def cmd_plan(cfg, out, formats, sweep) -> str:
    runs = _scenarios(cfg, sweep)
    for i, (point, sc) in enumerate(runs):
        stem = "plan" if not sweep else f"plan_{i:03d}"
        plan = build_plan(sc)
        if "json" in formats:
            _write(out, f"{stem}.json", plan.to_json(provenance=_provenance(sc, "plan"), sweep=point))
        if "csv" in formats:
            _write(out, f"{stem}.csv", plan.to_csv())
    edges = ", ".join(f"{b:.1f}" for b in plan.boundaries)
    return f"plan: {len(plan.stations)} stations; boundaries [{edges}]"


def cmd_fitline(points_path: Path, d0: float, out: Path, formats) -> str:
    pts = read_survey_csv(points_path)
    line = fit_deployment_line(pts, d0)
    moved = deployment_transform(pts, line)
    payload = {"slope": line.slope, "intercept": line.intercept,
               "shifted_intercept": line.shifted_intercept, "d0_m": d0,
               "points_below_line": line.below}
    _write(out, "fitline.json", _json_text(payload))
    if "csv" in formats:
        _write(out, "deployment_curve.csv",
               _csv_text(["x_m", "y_m"], [[float(x), float(y)] for x, y in moved]))
    if "json" in formats:
        _write(out, "deployment_curve.json",
               _json_text([{"x_m": float(x), "y_m": float(y)} for x, y in moved]))
    return f"fitline: y = {line.slope!r} x + {line.shifted_intercept!r} (shifted by d0={d0!r})"


# -- entry point ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="railservice",
                                description="Service-driven base-station planning along a railway.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        sp.add_argument("--config", type=Path, required=needs_config, help="scenario JSON file")
        sp.add_argument("--out", type=Path, help="output directory (default: config outputs.dir)")
        sp.add_argument("--format", choices=["csv", "json"], action="append",
                        help="output format; repeat for both (default: config outputs.formats)")

    for name, helptext in [("trace", "capacity and cumulative service over one pass"),
                           ("interval", "service interval for a single station"),
                           ("plan", "place stations along the rail"),
                           ("onoff", "transmission start/stop window")]:
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--sweep", metavar="KEY=lo:hi:n",
                        help="repeat over n values of a dotted config key, e.g. train.v=50:200:7")

    fp = sub.add_parser("fitline", help="fit the deployment line to surveyed rail points")
    common(fp, needs_config=False)
    fp.add_argument("--points", type=Path, help="CSV with header x,y (default: config geometry.csv)")
    fp.add_argument("--d0", type=float, help="offset of the deployment line (default: config radio.d0)")
    return p


COMMANDS: dict[str, Callable] = {
    "trace": cmd_trace,
    "interval": cmd_interval,
    "plan": cmd_plan,
    "onoff": cmd_onoff,
}


def run(args: argparse.Namespace) -> str:
    cfg = ScenarioConfig.load(args.config) if args.config is not None else None
    out = args.out if args.out is not None else Path(cfg.out_dir if cfg else "out")
    if cfg is not None and args.out is None and not out.is_absolute():
        out = Path(cfg.base_dir) / out
    formats = tuple(dict.fromkeys(args.format)) if args.format else (cfg.formats if cfg else ("csv", "json"))
    if args.command == "fitline":
        points = args.points
        if points is None:
            if cfg is None or cfg.geometry.csv is None:
                raise ValidationError("give --points or a config with geometry.csv", "--points")
            points = Path(cfg.base_dir) / cfg.geometry.csv
        d0 = args.d0 if args.d0 is not None else (cfg.radio.d0 if cfg else None)
        if d0 is None or not d0 > 0:
            raise ValidationError("a positive d0 is required", "--d0")
        msg = cmd_fitline(points, d0, out, formats)
        if cfg is not None:
            _write(out, "provenance.json", _json_text(_provenance(cfg, "fitline")))
        return msg
    msg = COMMANDS[args.command](cfg, out, formats, args.sweep)
    _write(out, "provenance.json", _json_text(_provenance(cfg, args.command)))
    return msg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        print(run(args))
        return EXIT_OK
    except (ValidationError, DomainError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InfeasibleRequirementError, NoRootError) as exc:
        bound = getattr(exc, "bound", None)
        extra = f" (feasibility bound {bound!r})" if bound is not None else ""
        print(f"infeasible: {exc}{extra}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"no convergence: {exc} (partial estimate {exc.partial!r})", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
