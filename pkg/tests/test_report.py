import json
from fractions import Fraction

import pytest

from cat0_classify.classifying import RowResult, Verification
from cat0_classify.report import RunConfig, build_report, dump_report, load_config, parse_config
from cat0_classify.validation import ConfigError, check_battery, check_positive_int, check_rational
from cat0_classify import preset


def test_parse_config_with_units_and_aliases():
    cfg = parse_config("group = pm  # wallpaper\nR = 5/2 units\nsphere-dim = 4\n\n")
    assert cfg == {"group": "pm", "window": Fraction(5, 2), "sphere_dim": 4}


@pytest.mark.parametrize("text", ["nonsense", "colour = red", "window = 2 metres", "depth = x"])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("group = pg\nwindow = 3\nseed = 4\n")
    cfg = load_config(p).validated()
    assert cfg.group == "pg" and cfg.window == 3 and cfg.seed == 4
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_overrides_ignore_none():
    cfg = RunConfig().with_overrides(group="pm", window=None)
    assert cfg.group == "pm" and cfg.window == 2


def test_validation_helpers():
    assert check_rational("5/2", "x") == Fraction(5, 2)
    for bad in (0.5, True, "abc", -1):
        with pytest.raises(ConfigError):
            check_rational(bad, "x")
    with pytest.raises(ConfigError):
        check_positive_int("2.5", "n")
    with pytest.raises(ConfigError):
        check_battery("trivial,glide-Z", preset("p1"))
    assert [r.name for r in check_battery("Z^2", preset("p1"))] == ["Z^2"]


def test_report_shape():
    rows = [RowResult("trivial", "FIN", "FIN", True, "collapse", True)]
    rep = build_report("build-efin", RunConfig().validated(), {"balls": 3}, Verification("fin", rows, {"ok": True}))
    text = dump_report(rep)
    back = json.loads(text)
    assert back["passed"] and back["schema_version"] == "1.0"
    assert back["config"]["window"] == "2"
    assert dump_report(rep) == text


def test_report_requires_certificates():
    rows = [RowResult("trivial", "FIN", "FIN", True, "", True)]
    with pytest.raises(ValueError):
        build_report("build-efin", RunConfig(), {}, Verification("fin", rows, {}))


def test_refused_report_is_not_passed():
    rep = build_report("build-evc", RunConfig(), {}, status="refused", reason="why")
    assert not rep["passed"] and rep["reason"] == "why"
