"""Command-line tests: subcommands, determinism and exit codes."""

from pathlib import Path

import pytest
import yaml

from cli.main import cli_main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TWO_BIDDER = str(CONFIGS / "two_bidder.yaml")
ADDITIVE = str(CONFIGS / "additive_game.yaml")


def test_optimize_two_bidder_market(tmp_path):
    """optimize writes the profile document of the two-bidder market."""
    out = tmp_path / "profile.yaml"
    assert cli_main(["optimize", "--config", TWO_BIDDER, "--out", str(out)]) == 0
    doc = yaml.safe_load(out.read_text())
    assert doc["nucleolus"] == pytest.approx([8.0, 2.0, 0.0], abs=1e-7)
    assert doc["players"] == [0, 1, 2]
    assert sum(e["probability"] for e in doc["entries"]) == pytest.approx(1.0)


def test_optimize_with_diagnostics(tmp_path):
    """--diagnose adds the equilibrium report to the profile."""
    out = tmp_path / "profile.yaml"
    assert cli_main(["optimize", "--config", TWO_BIDDER, "--out", str(out), "--diagnose"]) == 0
    doc = yaml.safe_load(out.read_text())
    assert doc["equilibrium_report"]["grid"] == 50


def test_simulate_is_deterministic(tmp_path):
    """Two simulate runs with the same seed write identical bytes."""
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli_main(["simulate", "--config", TWO_BIDDER, "--rounds", "1", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].startswith("round,mechanism")
    assert len(lines) == 3


def test_simulate_writes_report(tmp_path):
    """--report writes the mechanism comparison."""
    csv_path, report_path = tmp_path / "m.csv", tmp_path / "r.yaml"
    code = cli_main(["simulate", "--config", TWO_BIDDER, "--rounds", "3", "--out", str(csv_path), "--report", str(report_path)])
    assert code == 0
    report = yaml.safe_load(report_path.read_text())
    assert report["rounds"] == 3
    assert set(report["final_cum_revenue"]) == {"coop-optimizer", "gsp-truthful"}


def test_single_mechanism_override(tmp_path):
    """--mechanism limits the metrics to one mechanism."""
    out = tmp_path / "m.csv"
    assert cli_main(["simulate", "--config", TWO_BIDDER, "--rounds", "2", "--mechanism", "gsp-truthful", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert all(",gsp-truthful," in r for r in rows)


def test_nucleolus_of_additive_game(capsys):
    """The configured additive game prints its weights."""
    assert cli_main(["nucleolus", "--config", ADDITIVE]) == 0
    assert capsys.readouterr().out == "0 3.000000\n1 2.000000\n2 1.000000\n"


def test_game_dump(capsys):
    """game lists every coalition with its worth."""
    assert cli_main(["game", "--config", TWO_BIDDER]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 8
    assert "{0,2} 6.000000" in lines


def test_unknown_subcommand_is_usage_error():
    """Unknown subcommands exit with status 2."""
    assert cli_main(["bargain"]) == 2


def test_unknown_flag_is_usage_error():
    """Unknown flags exit with status 2."""
    assert cli_main(["game", "--verbose"]) == 2


def test_invalid_config_fails(tmp_path, capsys):
    """An invalid configuration exits with status 1 and a message on stderr."""
    bad = tmp_path / "bad.yaml"
    bad.write_text("market:\n  n: 3\n  k: 3\n")
    assert cli_main(["game", "--config", str(bad)]) == 1
    assert "k < n required" in capsys.readouterr().err


def test_missing_config_fails(tmp_path, capsys):
    """A missing configuration file exits with status 1."""
    assert cli_main(["game", "--config", str(tmp_path / "nope.yaml")]) == 1
    assert capsys.readouterr().err.startswith("error:")
