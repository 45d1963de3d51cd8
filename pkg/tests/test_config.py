"""Configuration and scenario-file tests."""

import numpy as np
import pytest
import tomli

from aeronet.errors import ValidationError
from aeronet.netconfig import (
    AssociationRule,
    Criterion,
    LayerSpec,
    NetworkConfig,
    Orientation,
    orientation_set,
    parse_scenario_text,
    validate,
)

TABLE_CONFIG = NetworkConfig(
    layers=(
        LayerSpec(altitude=0.0, density_rx=1e-5, density_tx=0.0),
        LayerSpec(altitude=100.0, density_rx=0.0, density_tx=1e-5),
    ),
    target_sinr=0.7,
)


class TestValidation:
    def test_reference_config_valid(self):
        cfg = validate(TABLE_CONFIG)
        assert cfg.num_layers == 2
        assert cfg.beta(0, 1) == 0.7
        assert cfg.altitude_diff(0, 1) == 100.0

    def test_idempotent(self):
        cfg = validate(TABLE_CONFIG)
        assert validate(cfg) is cfg

    def test_empty_layers(self):
        with pytest.raises(ValidationError, match="no layers"):
            validate(NetworkConfig(layers=()))

    def test_all_problems_reported(self):
        bad = NetworkConfig(
            layers=(
                LayerSpec(altitude=-5.0, density_rx=1e-5, density_tx=0.0, power=-1.0),
                LayerSpec(altitude=100.0, density_rx=0.0, density_tx=1e-5),
            ),
            noise_power=-1.0,
        )
        with pytest.raises(ValidationError) as err:
            validate(bad)
        text = "\n".join(err.value.problems)
        assert "altitude" in text and "power" in text and "noise_power" in text

    def test_total_density_preserved(self):
        cfg = validate(TABLE_CONFIG)
        for spec in cfg.layers:
            assert spec.density == spec.density_rx + spec.density_tx

    def test_beta_matrix_shape_checked(self):
        bad = NetworkConfig(layers=TABLE_CONFIG.layers, target_sinr=[[0.7]])
        with pytest.raises(ValidationError, match="shape"):
            validate(bad)

    def test_beta_matrix_accepted(self):
        beta = [[0.7, 0.5], [0.5, 0.9]]
        cfg = validate(NetworkConfig(layers=TABLE_CONFIG.layers, target_sinr=beta))
        assert cfg.beta(1, 0) == 0.5
        assert cfg.beta(1, 1) == 0.9

    def test_needs_both_node_types(self):
        tx_only = NetworkConfig(
            layers=(LayerSpec(altitude=100.0, density_rx=0.0, density_tx=1e-5),)
        )
        with pytest.raises(ValidationError, match="receiver"):
            validate(tx_only)


class TestAssociationRule:
    def test_four_tags(self):
        for tag in ("rn", "rs", "tn", "ts"):
            rule = AssociationRule.from_tag(tag)
            assert rule.tag == tag

    def test_orientation_set_receiver(self):
        cfg = validate(TABLE_CONFIG)
        dens = orientation_set(cfg, AssociationRule(Orientation.RECEIVER, Criterion.NEAREST))
        assert np.allclose(dens, [0.0, 1e-5])

    def test_orientation_set_transmitter(self):
        cfg = validate(TABLE_CONFIG)
        dens = orientation_set(cfg, AssociationRule(Orientation.TRANSMITTER, Criterion.NEAREST))
        assert np.allclose(dens, [1e-5, 0.0])


SCENARIO = """
schema_version = 1

[environment]
mu = 0.5
nu = 3e-4
xi = 20.0

[pathloss]
alpha_los = 2.5
alpha_nlos = 3.5

[fading]
m_los = 1

[[layers]]
altitude = 0.0
density_rx = 1e-5
density_tx = 0.0

[[layers]]
altitude = 100.0
density_rx = 0.0
density_tx = 1e-5

[association]
orientation = "r"
criterion = "n"
typical_layer = 0

[targets]
sinr = 0.7
"""


class TestScenarioParsing:
    def test_round_trip(self):
        scenario = parse_scenario_text(SCENARIO)
        assert scenario.rule.tag == "rn"
        assert scenario.typical_layer == 0
        assert scenario.config.beta(0, 1) == 0.7
        assert scenario.config.layers[1].altitude == 100.0

    def test_malformed_toml(self):
        with pytest.raises(tomli.TOMLDecodeError):
            parse_scenario_text("[environment\nmu = 0.5")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown key"):
            parse_scenario_text(SCENARIO.replace("mu = 0.5", "mu = 0.5\nhumidity = 0.9"))

    def test_unknown_top_level_rejected(self):
        with pytest.raises(ValidationError, match="top-level"):
            parse_scenario_text(SCENARIO + "\n[misc]\nx = 1\n")

    def test_invalid_pathloss_listed(self):
        bad = SCENARIO.replace("alpha_los = 2.5", "alpha_los = 1.5")
        with pytest.raises(ValidationError, match="alpha"):
            parse_scenario_text(bad)

    def test_orientation_names_accepted(self):
        text = SCENARIO.replace('orientation = "r"', 'orientation = "transmitter"')
        text = text.replace('criterion = "n"', 'criterion = "strongest"')
        text = text.replace("typical_layer = 0", "typical_layer = 1")
        assert parse_scenario_text(text).rule.tag == "ts"

    def test_unsupported_schema_version(self):
        with pytest.raises(ValidationError, match="schema_version"):
            parse_scenario_text(SCENARIO.replace("schema_version = 1", "schema_version = 99"))

    def test_typical_layer_range(self):
        with pytest.raises(ValidationError, match="typical_layer"):
            parse_scenario_text(SCENARIO.replace("typical_layer = 0", "typical_layer = 5"))
