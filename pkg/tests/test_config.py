import json

import pytest

from railservice.config import ScenarioConfig
from railservice.errors import ValidationError
from railservice.geometry import ArcRail, LineRail, SampledCurve, SineSeriesCurve
from railservice.placement import Amount, Ratio

BASE = {
    "geometry": {"type": "curve", "preset": "two_sine", "domain": [-10000, 10000]},
    "radio": {"snr0_db": 25, "alpha": 3, "d0": 50},
    "train": {"v": 100},
    "requirement": {"ratio": 0.8},
}


def cfg(**overrides):
    d = json.loads(json.dumps(BASE))
    for dotted, value in overrides.items():
        *head, last = dotted.split("__")
        node = d
        for k in head:
            node = node.setdefault(k, {})
        if value is None:
            node.pop(last, None)
        else:
            node[last] = value
    return d


def test_builds_objects():
    c = ScenarioConfig.from_dict(BASE)
    assert isinstance(c.build_geometry(), SineSeriesCurve)
    assert c.channel().gamma == pytest.approx(10**2.5 * 50**3)
    assert c.requirement() == Ratio(0.8)
    assert c.velocity() == 100.0
    assert c.numerics.trace_points == 2001
    assert c.first_station(c.build_geometry()) == 0.0


def test_round_trip_through_dict():
    c = ScenarioConfig.from_dict(cfg(requirement={"amount": 23}, numerics={"rel_tol": 1e-8}))
    again = ScenarioConfig.from_dict(json.loads(json.dumps(c.to_dict())))
    assert again == c
    assert again.requirement() == Amount(23.0)


@pytest.mark.parametrize("overrides,path", [
    (dict(geometry__type="spiral"), "geometry.type"),
    (dict(geometry__preset="nope"), "geometry.preset"),
    (dict(geometry__domain=[5, -5]), "geometry.domain"),
    (dict(radio__alpha=1.0), "radio.alpha"),
    (dict(radio__d0=None), "radio.d0"),
    (dict(radio__gamma=1e6), "radio"),
    (dict(radio__snr0_db="high"), "radio.snr0_db"),
    (dict(train__v=-3), "train.v"),
    (dict(requirement__ratio=1.5), "requirement.ratio"),
    (dict(requirement__amount=5), "requirement"),
    (dict(numerics__max_depth=2.5), "numerics.max_depth"),
    (dict(numerics__bogus=1), "numerics"),
    (dict(outputs__formats=["xml"]), "outputs.formats"),
    (dict(geometry__first_station=20000.0), "geometry.first_station"),
])
def test_validation_errors_name_the_field(overrides, path):
    with pytest.raises(ValidationError) as info:
        ScenarioConfig.from_dict(cfg(**overrides))
    assert info.value.path == path


def test_arc_geometry_needs_radius():
    with pytest.raises(ValidationError) as info:
        ScenarioConfig.from_dict({"geometry": {"type": "arc"}, "radio": BASE["radio"]})
    assert info.value.path == "geometry.R"
    c = ScenarioConfig.from_dict({"geometry": {"type": "arc", "R": 8000}, "radio": BASE["radio"]})
    assert isinstance(c.build_geometry(), ArcRail)
    assert isinstance(ScenarioConfig.from_dict({"geometry": {"type": "line"}, "radio": BASE["radio"]})
                      .build_geometry(), LineRail)


def test_missing_requirement_or_speed_is_reported_when_needed():
    c = ScenarioConfig.from_dict(cfg(requirement=None, train=None))
    with pytest.raises(ValidationError, match="requirement"):
        c.requirement()
    with pytest.raises(ValidationError, match="train.v"):
        c.velocity()


def test_csv_curve_resolves_relative_to_config(tmp_path):
    (tmp_path / "rail.csv").write_text("x,y\n0,100\n500,130\n1000,150\n1500,185\n")
    d = {"geometry": {"type": "curve", "csv": "rail.csv"}, "radio": BASE["radio"],
         "requirement": {"ratio": 0.5}}
    (tmp_path / "s.json").write_text(json.dumps(d))
    c = ScenarioConfig.load(tmp_path / "s.json")
    curve = c.build_geometry()
    assert isinstance(curve, SampledCurve)
    assert curve.domain[0] > 0.0  # survey x = 0 maps slightly right of the origin
    assert c.first_station(curve) == pytest.approx(0.5 * sum(curve.domain))
    with pytest.raises(ValidationError) as info:
        ScenarioConfig.from_dict(d, base_dir=tmp_path / "elsewhere")
    assert info.value.path == "geometry.csv"


def test_load_errors(tmp_path):
    with pytest.raises(ValidationError):
        ScenarioConfig.load(tmp_path / "none.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        ScenarioConfig.load(tmp_path / "bad.json")


def test_with_value_replaces_dotted_key():
    c = ScenarioConfig.from_dict(BASE)
    assert c.with_value("train.v", 150.0).v == 150.0
    swapped = c.with_value("requirement.amount", 10.0)
    assert swapped.ratio is None and swapped.amount == 10.0
    assert c.with_value("numerics.trace_points", 101.2).numerics.trace_points == 101
