import json

import pytest

from rcmlab.config import (Budget, ConfigError, Seeds, build_config, load_config, parse_p,
                           validate)

BASE = {"dimension": 2, "kernel": {"variant": "disk"}, "lambda": 0.5, "box": {"L": 6.0},
        "samples": 10}


def test_missing_key_is_named():
    doc = {k: v for k, v in BASE.items() if k != "kernel"}
    with pytest.raises(ConfigError, match="missing required key 'kernel' for simulate"):
        build_config("simulate", doc)


def test_box_side_required():
    with pytest.raises(ConfigError, match="box.L"):
        build_config("simulate", dict(BASE, box={}))
    with pytest.raises(ConfigError, match="box.sizes"):
        build_config("lambda-c", dict(BASE, box={"L": 8.0}))


def test_schema_violation_reports_path():
    with pytest.raises(ConfigError, match="lambda"):
        build_config("simulate", dict(BASE, **{"lambda": -1}))


def test_displacements_must_match_dimension():
    with pytest.raises(ConfigError, match="displacement"):
        build_config("tau", dict(BASE, displacements=[[1.0]]))


def test_overrides_and_defaults():
    cfg = build_config("simulate", BASE, seed=7, budget_cells=99)
    assert cfg.seeds == Seeds(7)
    assert cfg.budget == Budget(99)
    assert cfg.lam == 0.5 and cfg.L == 6.0
    # overrides never touch the caller's document
    assert "seeds" not in BASE


def test_digest_depends_on_command_and_content():
    a = build_config("simulate", BASE)
    assert a.digest == build_config("simulate", dict(BASE)).digest
    assert a.digest != build_config("chi", BASE).digest
    assert a.digest != build_config("simulate", dict(BASE, samples=11)).digest


def test_manifest_is_accepted_as_config():
    cfg = build_config("simulate", BASE)
    manifest = {"command": "simulate", "config": cfg.raw, "config_digest": cfg.digest}
    assert build_config("simulate", manifest).digest == cfg.digest


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config("oz", tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError, match="valid JSON"):
        load_config("oz", bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(BASE))
    assert load_config("chi", good).samples == 10


def test_unknown_command():
    with pytest.raises(ConfigError, match="unknown command"):
        build_config("plot", BASE)


@pytest.mark.parametrize("p,want", [("inf", float("inf")), (2, 2.0), (1.5, 1.5)])
def test_parse_p(p, want):
    assert parse_p(p) == want


def test_fit_schema():
    validate({"exponent": 1.0, "amplitude": 0.1, "r2": 0.99, "window": [1, 2],
              "n_points": 9}, "fit")
    with pytest.raises(ConfigError):
        validate({"exponent": "one"}, "fit")
