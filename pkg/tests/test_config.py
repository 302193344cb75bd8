"""Unit tests for run configuration parsing and validation."""

from pathlib import Path

import pytest

from optimizer.config import RunConfig, dump_config, load_config, parse_config
from optimizer.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_empty_document_gives_defaults():
    """An empty document resolves to the default configuration."""
    config = parse_config("")
    assert config == RunConfig()
    assert (config.market.n, config.market.k) == (10, 5)


def test_minimal_ten_by_five():
    """The minimal ten-bidder, five-slot document parses."""
    config = parse_config("market:\n  n: 10\n  k: 5\n")
    rates = config.market.click_through_rates()
    assert len(rates) == 5
    assert rates[0] == pytest.approx(0.9)
    assert rates == sorted(rates, reverse=True)


def test_slots_must_be_fewer_than_bidders():
    """k >= n names the offending key."""
    with pytest.raises(ConfigError, match="k < n required") as info:
        parse_config("market:\n  n: 5\n  k: 5\n")
    assert info.value.key == "market.k"


def test_gamma_open_interval():
    """Discount factors outside (0, 1) are rejected."""
    with pytest.raises(ConfigError) as info:
        parse_config("bidders:\n  gamma: 1.0\n")
    assert info.value.key == "bidders.gamma"


def test_unknown_key_rejected():
    """Unknown keys are rejected with their dotted path."""
    with pytest.raises(ConfigError, match="unknown key") as info:
        parse_config("market:\n  slots: 3\n")
    assert info.value.key == "market.slots"


def test_schema_version_pinned():
    with pytest.raises(ConfigError):
        parse_config("schema_version: 2\n")


def test_invalid_yaml():
    """Unparseable YAML is a configuration error."""
    with pytest.raises(ConfigError, match="invalid YAML"):
        parse_config("market: [n: 1\n")


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigError):
        parse_config("- 1\n- 2\n")


def test_fixed_valuations_must_match_n():
    """Fixed valuations must list one value per bidder."""
    with pytest.raises(ConfigError) as info:
        parse_config("market:\n  n: 3\n  k: 1\nvaluations:\n  fixed: [1, 2]\n")
    assert info.value.key == "valuations.fixed"


def test_per_bidder_gamma_must_match_n():
    """Per-bidder discount factors must list one value per bidder."""
    with pytest.raises(ConfigError) as info:
        parse_config("market:\n  n: 3\n  k: 1\nbidders:\n  gamma: [0.5, 0.5]\n")
    assert info.value.key == "bidders.gamma"


def test_explicit_ctr_must_match_k():
    """An explicit CTR list must have k entries."""
    with pytest.raises(ConfigError):
        parse_config("market:\n  n: 3\n  k: 2\n  ctr: [1.0]\n")


def test_dump_then_parse_is_identity():
    """Dumped configuration parses back to an equal object."""
    config = parse_config("market:\n  n: 4\n  k: 2\n  ctr: [1.0, 0.5]\nbidders:\n  gamma: [0.5, 0.6, 0.7, 0.8]\n")
    assert parse_config(dump_config(config)) == config


def test_overrides_revalidate():
    """Command-line overrides go through validation again."""
    config = RunConfig().with_overrides(seed=7, rounds=3, mechanism="gsp-truthful")
    assert config.simulation.master_seed == 7
    assert config.simulation.rounds == 3
    assert config.simulation.mechanisms == ["gsp-truthful"]


def test_simulation_config_carries_settings():
    """The resolved simulation settings carry every configured value."""
    sim = parse_config("market:\n  n: 4\n  k: 2\nsimulation:\n  rounds: 7\n").simulation_config()
    assert sim.n == 4
    assert sim.k == 2
    assert sim.rounds == 7
    assert sim.gamma == [0.9] * 4


def test_missing_file():
    """A missing file is a configuration error."""
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(CONFIGS / "does_not_exist.yaml")


@pytest.mark.parametrize("name", ["default.yaml", "two_bidder.yaml", "additive_game.yaml"])
def test_shipped_configs_load(name):
    """Every file under configs/ loads."""
    assert isinstance(load_config(CONFIGS / name), RunConfig)


def test_game_section_builds_game():
    """A game section becomes a characteristic game."""
    game = load_config(CONFIGS / "additive_game.yaml").game.to_game()
    assert game.num_players == 3
    assert game.value(game.grand) == 6.0
    assert game.value(0b011) == 5.0


def test_game_section_rejects_unknown_player():
    """Coalitions naming players beyond the game are rejected."""
    with pytest.raises(ConfigError):
        parse_config("game:\n  players: 2\n  coalitions:\n    - {members: [0, 2], value: 1}\n")
