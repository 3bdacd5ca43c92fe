import json

import numpy as np
import pytest

from closedchain import fixtures
from closedchain.config import load_config, parse_config
from closedchain.errors import ConfigError


def _minimal_knee():
    return {
        "mechanism": "fourbar",
        "geometry": {
            "crank": 0.05, "rod": 0.21, "link": 0.05, "base": 0.2,
            "serial_range": [0.0, 2.3], "motor_bounds": [0.0, 3.0],
        },
    }


def test_shipped_knee_config_matches_fixture():
    cfg = load_config("configs/knee.json")
    assert cfg.params == fixtures.knee()
    assert cfg.k_p[0] == 60.0
    assert cfg.k_d[0] == 1.2
    assert cfg.plant.inertia[0] == 0.0045
    assert cfg.rates.policy_hz == 25


def test_shipped_parallelogram_config_matches_fixture():
    cfg = load_config("configs/knee_parallelogram.json")
    assert cfg.params == fixtures.knee_parallelogram()


def test_shipped_ankle_config_matches_fixture():
    cfg = load_config("configs/ankle.json")
    fix = fixtures.ankle()
    assert cfg.mechanism == "ankle"
    for got, ref in ((cfg.params.alpha, fix.alpha), (cfg.params.beta, fix.beta)):
        assert np.array_equal(got.foot_point, ref.foot_point)
        assert np.array_equal(got.motor_origin, ref.motor_origin)
        assert got.crank == ref.crank and got.rod == ref.rod
    assert cfg.params.serial_range == fix.serial_range


def test_defaults_fill_in():
    cfg = parse_config(_minimal_knee())
    assert cfg.plant.inertia[0] == 0.01
    assert cfg.k_p[0] == 50.0
    assert cfg.rates.physics_hz == 10000
    # default reference sits mid range with quarter-span swing
    assert cfg.reference.kind == "sine"
    assert cfg.reference.offset[0] == pytest.approx(1.15)
    assert cfg.reference.amplitude[0] == pytest.approx(0.575)


def test_scalar_broadcast_two_dof():
    doc = json.loads(open("configs/ankle.json").read())
    doc["serial_gains"] = {"k_p": 35.0, "k_d": 0.7}
    cfg = parse_config(doc)
    assert cfg.k_p.tolist() == [35.0, 35.0]
    assert cfg.k_d.tolist() == [0.7, 0.7]


def test_unknown_key_names_path():
    doc = _minimal_knee()
    doc["geometry"]["bogus"] = 1
    with pytest.raises(ConfigError, match=r"\$\.geometry"):
        parse_config(doc)
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(doc)


def test_unknown_top_level_key():
    doc = _minimal_knee()
    doc["extra"] = {}
    with pytest.raises(ConfigError, match="extra"):
        parse_config(doc)


def test_wrong_type_names_path():
    doc = _minimal_knee()
    doc["geometry"]["crank"] = "wide"
    with pytest.raises(ConfigError, match=r"\$\.geometry\.crank"):
        parse_config(doc)


def test_missing_required_key():
    doc = _minimal_knee()
    del doc["geometry"]["rod"]
    with pytest.raises(ConfigError, match="rod"):
        parse_config(doc)


def test_unknown_mechanism():
    with pytest.raises(ConfigError, match="mechanism"):
        parse_config({"mechanism": "hexapod", "geometry": {}})


def test_bad_rates_rejected():
    doc = _minimal_knee()
    doc["rates"] = {"policy_hz": 30, "gains_hz": 100,
                    "motor_hz": 1000, "physics_hz": 10000}
    with pytest.raises(ConfigError, match=r"\$\.rates"):
        parse_config(doc)


def test_bad_geometry_rejected():
    doc = _minimal_knee()
    doc["geometry"]["crank"] = -0.05
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("configs/does_not_exist.json")
