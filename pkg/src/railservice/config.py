"""Scenario configuration: JSON in, validated objects out.

Example::

    {
      "geometry": {"type": "curve", "preset": "two_sine", "domain": [-10000, 10000]},
      "radio": {"snr0_db": 25, "alpha": 3, "d0": 50},
      "train": {"v": 100},
      "requirement": {"ratio": 0.8},
      "numerics": {"stations_per_side": 4},
      "outputs": {"dir": "out", "formats": ["csv", "json"]}
    }

Validation errors name the offending field by dotted path. SNR given in dB
is converted to the transmitter SNR once, here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .channel import ChannelParams, snr0_to_gamma
from .errors import DomainError, ValidationError
from .geometry import (
    ArcRail,
    CurveRail,
    LineRail,
    SampledCurve,
    fit_deployment_line,
    two_sine_curve,
    read_survey_csv,
    to_deployment_frame,
)
from .placement import Amount, Ratio, ServiceRequirement
from .quadrature import QuadratureConfig
from .service import TruncationRule

PRESETS = ("two_sine",)
FORMATS = ("csv", "json")


def _num(d: dict, key: str, path: str, *, required: bool = True, default: Any = None) -> Any:
    if key not in d or d[key] is None:
        if required:
            raise ValidationError("missing required value", f"{path}.{key}")
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ValidationError(f"expected a finite number, got {val!r}", f"{path}.{key}")
    return float(val)


def _section(d: dict, key: str, *, required: bool = True) -> dict:
    sec = d.get(key)
    if sec is None:
        if required:
            raise ValidationError("missing section", key)
        return {}
    if not isinstance(sec, dict):
        raise ValidationError("expected an object", key)
    return sec


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ValidationError(f"unknown key(s) {extra}", path)


@dataclass(frozen=True)
class GeometrySpec:
    type: str = "line"
    R: float | None = None
    preset: str | None = None
    csv: str | None = None
    domain: tuple[float, float] | None = None
    survey_frame: bool = True
    first_station: float | None = None


@dataclass(frozen=True)
class RadioSpec:
    alpha: float
    d0: float
    gamma: float | None = None
    snr0_db: float | None = None


@dataclass(frozen=True)
class NumericsSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_depth: int = 50
    epsilon_capacity: float = 1e-9
    far_field_tail: bool = True
    bracket_tol: float = 1e-6
    scan_step: float | None = None
    trace_points: int = 2001
    stations_per_side: int | None = 5


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: GeometrySpec
    radio: RadioSpec
    v: float | None = None
    ratio: float | None = None
    amount: float | None = None
    numerics: NumericsSpec = field(default_factory=NumericsSpec)
    out_dir: str = "out"
    formats: tuple[str, ...] = FORMATS
    base_dir: str = "."

    # -- parsing -------------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path = ".") -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ValidationError("configuration must be a JSON object")
        _check_keys(d, {"geometry", "radio", "train", "requirement", "numerics", "outputs"}, "config")

        g = _section(d, "geometry")
        _check_keys(g, {"type", "R", "preset", "csv", "domain", "survey_frame", "first_station"},
                    "geometry")
        gtype = g.get("type", "line")
        if gtype not in ("line", "arc", "curve"):
            raise ValidationError(f"must be one of line, arc, curve; got {gtype!r}", "geometry.type")
        R = _num(g, "R", "geometry", required=gtype == "arc")
        preset = g.get("preset")
        csv_path = g.get("csv")
        domain = g.get("domain")
        if gtype == "curve":
            if (preset is None) == (csv_path is None):
                raise ValidationError("curve geometry needs exactly one of preset or csv", "geometry")
            if preset is not None and preset not in PRESETS:
                raise ValidationError(f"unknown preset {preset!r}; known: {list(PRESETS)}",
                                      "geometry.preset")
            if csv_path is not None:
                if not isinstance(csv_path, str):
                    raise ValidationError("expected a path string", "geometry.csv")
                if not (Path(base_dir) / csv_path).is_file():
                    raise ValidationError(f"file not found: {csv_path}", "geometry.csv")
        elif preset is not None or csv_path is not None:
            raise ValidationError("preset/csv only apply to curve geometry", "geometry")
        if domain is not None:
            if (not isinstance(domain, (list, tuple)) or len(domain) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in domain)
                    or not domain[0] < domain[1]):
                raise ValidationError("expected [x_l, x_r] with x_l < x_r", "geometry.domain")
            domain = (float(domain[0]), float(domain[1]))
        survey_frame = g.get("survey_frame", True)
        if not isinstance(survey_frame, bool):
            raise ValidationError("expected true or false", "geometry.survey_frame")
        first_station = _num(g, "first_station", "geometry", required=False)
        if first_station is not None and gtype != "curve":
            raise ValidationError("only curve rails take a first-station abscissa",
                                  "geometry.first_station")
        if first_station is not None and domain is not None and not domain[0] <= first_station <= domain[1]:
            raise ValidationError("must lie inside the domain", "geometry.first_station")
        geometry = GeometrySpec(type=gtype, R=R, preset=preset, csv=csv_path, domain=domain,
                                survey_frame=survey_frame, first_station=first_station)

        r = _section(d, "radio")
        _check_keys(r, {"alpha", "d0", "gamma", "snr0_db"}, "radio")
        alpha = _num(r, "alpha", "radio")
        d0 = _num(r, "d0", "radio")
        gamma = _num(r, "gamma", "radio", required=False)
        snr0_db = _num(r, "snr0_db", "radio", required=False)
        if (gamma is None) == (snr0_db is None):
            raise ValidationError("give exactly one of gamma or snr0_db", "radio")
        if alpha < 2:
            raise ValidationError("path-loss exponent must be >= 2", "radio.alpha")
        if d0 <= 0:
            raise ValidationError("must be positive", "radio.d0")
        if gamma is not None and gamma <= 0:
            raise ValidationError("must be positive", "radio.gamma")
        if gtype == "arc" and not R > d0:
            raise ValidationError("arc radius must exceed d0", "geometry.R")
        radio = RadioSpec(alpha=alpha, d0=d0, gamma=gamma, snr0_db=snr0_db)

        t = _section(d, "train", required=False)
        _check_keys(t, {"v"}, "train")
        v = _num(t, "v", "train", required=False)
        if v is not None and v <= 0:
            raise ValidationError("must be positive", "train.v")

        q = _section(d, "requirement", required=False)
        _check_keys(q, {"ratio", "amount"}, "requirement")
        ratio = _num(q, "ratio", "requirement", required=False)
        amount = _num(q, "amount", "requirement", required=False)
        if ratio is not None and amount is not None:
            raise ValidationError("give only one of ratio or amount", "requirement")
        if ratio is not None and not 0 < ratio < 1:
            raise ValidationError("must lie in (0, 1)", "requirement.ratio")
        if amount is not None and amount <= 0:
            raise ValidationError("must be positive", "requirement.amount")

        n = _section(d, "numerics", required=False)
        fields_ = set(NumericsSpec.__dataclass_fields__)
        _check_keys(n, fields_, "numerics")
        kw: dict[str, Any] = {}
        for key in ("rel_tol", "abs_tol", "epsilon_capacity", "bracket_tol", "scan_step"):
            val = _num(n, key, "numerics", required=False)
            if val is not None:
                if val <= 0:
                    raise ValidationError("must be positive", f"numerics.{key}")
                kw[key] = val
        for key in ("max_depth", "trace_points", "stations_per_side"):
            if key in n and n[key] is not None:
                val = n[key]
                if isinstance(val, bool) or not isinstance(val, int) or val < (2 if key == "trace_points" else 0):
                    raise ValidationError("expected a non-negative integer", f"numerics.{key}")
                kw[key] = val
            elif key == "stations_per_side" and key in n:
                kw[key] = None
        if "far_field_tail" in n:
            if not isinstance(n["far_field_tail"], bool):
                raise ValidationError("expected true or false", "numerics.far_field_tail")
            kw["far_field_tail"] = n["far_field_tail"]
        numerics = NumericsSpec(**kw)

        o = _section(d, "outputs", required=False)
        _check_keys(o, {"dir", "formats"}, "outputs")
        out_dir = o.get("dir", "out")
        if not isinstance(out_dir, str):
            raise ValidationError("expected a path string", "outputs.dir")
        formats = o.get("formats", list(FORMATS))
        if isinstance(formats, str):
            formats = [formats]
        if not isinstance(formats, list) or not formats or any(f not in FORMATS for f in formats):
            raise ValidationError(f"expected a non-empty subset of {list(FORMATS)}", "outputs.formats")

        return cls(geometry=geometry, radio=radio, v=v, ratio=ratio, amount=amount,
                   numerics=numerics, out_dir=out_dir, formats=tuple(formats),
                   base_dir=str(base_dir))

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file not found: {path}", "config")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}", "config") from None
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        g: dict[str, Any] = {"type": self.geometry.type}
        if self.geometry.R is not None:
            g["R"] = self.geometry.R
        if self.geometry.preset is not None:
            g["preset"] = self.geometry.preset
        if self.geometry.csv is not None:
            g["csv"] = self.geometry.csv
            g["survey_frame"] = self.geometry.survey_frame
        if self.geometry.domain is not None:
            g["domain"] = list(self.geometry.domain)
        if self.geometry.first_station is not None:
            g["first_station"] = self.geometry.first_station
        r: dict[str, Any] = {"alpha": self.radio.alpha, "d0": self.radio.d0}
        if self.radio.gamma is not None:
            r["gamma"] = self.radio.gamma
        else:
            r["snr0_db"] = self.radio.snr0_db
        out: dict[str, Any] = {"geometry": g, "radio": r}
        if self.v is not None:
            out["train"] = {"v": self.v}
        if self.ratio is not None:
            out["requirement"] = {"ratio": self.ratio}
        elif self.amount is not None:
            out["requirement"] = {"amount": self.amount}
        out["numerics"] = dict(vars(self.numerics))
        out["outputs"] = {"dir": self.out_dir, "formats": list(self.formats)}
        return out

    # -- sweeps ----------------------------------------------------------------

    def with_value(self, key: str, value: float) -> "ScenarioConfig":
        """Copy with one dotted config key (e.g. ``train.v``) replaced."""
        d = self.to_dict()
        parts = key.split(".")
        node = d
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ValidationError("cannot sweep into a non-object", key)
        if parts[0] == "requirement":
            node.clear()
        if parts[-1] in ("max_depth", "trace_points", "stations_per_side"):
            value = int(round(value))
        node[parts[-1]] = value
        return ScenarioConfig.from_dict(d, self.base_dir)

    # -- builders --------------------------------------------------------------

    def channel(self) -> ChannelParams:
        r = self.radio
        gamma = r.gamma if r.gamma is not None else snr0_to_gamma(r.snr0_db, r.alpha, r.d0)
        try:
            return ChannelParams(gamma=gamma, alpha=r.alpha, d0=r.d0)
        except DomainError as exc:
            raise ValidationError(str(exc), "radio") from None

    def build_geometry(self) -> LineRail | ArcRail | CurveRail:
        g = self.geometry
        if g.type == "line":
            return LineRail()
        if g.type == "arc":
            return ArcRail(g.R, self.radio.d0)
        if g.preset == "two_sine":
            if g.domain is None:
                return two_sine_curve(self.radio.d0)
            return two_sine_curve(self.radio.d0, g.domain)
        pts = read_survey_csv(Path(self.base_dir) / g.csv)
        if g.survey_frame:
            curve = to_deployment_frame(pts, fit_deployment_line(pts, self.radio.d0))
        else:
            curve = SampledCurve(pts[:, 0], pts[:, 1])
        if g.domain is not None:
            raise ValidationError("domain is taken from the survey points for csv curves",
                                  "geometry.domain")
        return curve

    def first_station(self, geometry: LineRail | ArcRail | CurveRail) -> float:
        """Abscissa of the first station on a curve rail (0 on line and arc rails).

        Unless configured, this is 0 when the curve domain contains it and
        the domain midpoint otherwise.
        """
        if not isinstance(geometry, CurveRail):
            return 0.0
        x = self.geometry.first_station
        if x is None:
            lo, hi = geometry.domain
            return 0.0 if lo <= 0.0 <= hi else 0.5 * (lo + hi)
        if not geometry.contains(x):
            raise ValidationError(f"{x} lies outside the curve domain {geometry.domain}",
                                  "geometry.first_station")
        return x

    def requirement(self) -> ServiceRequirement:
        if self.ratio is not None:
            return Ratio(self.ratio)
        if self.amount is not None:
            return Amount(self.amount)
        raise ValidationError("this command needs a ratio or amount", "requirement")

    def velocity(self) -> float:
        if self.v is None:
            raise ValidationError("this command needs the train speed", "train.v")
        return self.v

    def quadrature(self) -> QuadratureConfig:
        n = self.numerics
        return QuadratureConfig(rel_tol=n.rel_tol, abs_tol=n.abs_tol, max_depth=n.max_depth)

    def truncation(self) -> TruncationRule:
        n = self.numerics
        return TruncationRule(epsilon_capacity=n.epsilon_capacity, far_field_tail=n.far_field_tail)

    def replace(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)
