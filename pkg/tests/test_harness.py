"""Unit tests for the repeated-auction harness and the mechanism comparison."""

import dataclasses

import pytest

from engine.coop_optimizer_mechanism import CoopOptimizerMechanism
from engine.gsp_truthful_mechanism import GspTruthfulMechanism
from engine.lef_mapping import lef_bids
from optimizer.errors import ContractViolation, SimulationTerminated
from optimizer.memory import SolvedMarkets
from optimizer.schemas.market import Market
from optimizer.schemas.profile import CorrelatedBidProfile, ProfileEntry
from optimizer.schemas.simulation import BidderState, MetricsRow, MetricsTable, SimulationConfig
from sim.harness import (
    World,
    config_digest,
    run_round,
    run_seed,
    run_seed_variants,
    run_simulation,
    run_variants,
    run_world,
)
from sim.report import compare_mechanisms
from sim.seeding import RoundStreams, draw_valuations


def _config(**overrides):
    data = dict(
        ctr=[1.0, 0.5],
        n=3,
        fixed_valuations=[10.0, 8.0, 5.0],
        gamma=[0.9, 0.9, 0.9],
        rounds=5,
        seeds=3,
        mechanisms=["gsp-truthful"],
    )
    data.update(overrides)
    return SimulationConfig(**data)


def _world(mechanism, valuations=(10.0, 6.0, 1.0), ctr=(1.0, 0.5)):
    market = Market(ctr=list(ctr), valuations=list(valuations))
    states = tuple(BidderState.fresh(pid, v, 0.9) for pid, v in zip(market.ids, valuations))
    return World(market=market, states=states, mechanism=mechanism, dropouts=False)


def test_one_truthful_round():
    """One truthful round on the fixed market."""
    table = run_simulation(_config(rounds=1, seeds=1, outcome="slot-allocated"))
    (row,) = table.rows
    assert row.round == 1
    assert row.mechanism == "gsp-truthful"
    assert row.mean_cum_revenue == pytest.approx(10.5)
    assert row.mean_active_bidders >= 2


def test_same_master_seed_is_bit_identical():
    """Same master seed, same metrics."""
    config = _config(fixed_valuations=None, mechanisms=["gsp-truthful", "coop-optimizer"], master_seed=11)
    assert run_simulation(config).model_dump() == run_simulation(config).model_dump()


def test_identical_valuations_give_flat_truthful_revenue():
    """Equal valuations give the same truthful revenue every round."""
    config = _config(fixed_valuations=None, spread=0.0, base_value=10.0, dropouts=False)
    for row in run_simulation(config).rows:
        assert row.mean_round_revenue == pytest.approx(15.0)
        assert row.mean_active_bidders == 3


def test_coop_round_revenue_bounded_by_truthful_without_dropouts():
    """Cooperative round revenue never exceeds truthful revenue."""
    config = _config(
        fixed_valuations=None,
        n=4,
        gamma=[0.9] * 4,
        mechanisms=["gsp-truthful", "coop-optimizer"],
        dropouts=False,
        rounds=4,
    )
    table = run_simulation(config)
    for coop, gsp in zip(table.curve("coop-optimizer"), table.curve("gsp-truthful")):
        assert coop.mean_round_revenue <= gsp.mean_round_revenue + 1e-9


def test_coop_round_with_lef_entry():
    """A cooperative round charges the drawn entry's LEF payments."""
    mechanism = CoopOptimizerMechanism()
    world = _world(mechanism)
    lef = lef_bids(world.market, [1, 2])
    mechanism.cache.put([0, 1, 2], CorrelatedBidProfile(entries=[ProfileEntry(coalition=[1, 2], probability=1.0, lef=lef)]))
    _, record = run_round(world, RoundStreams(0, 0, "coop-optimizer"))
    assert record.revenue == pytest.approx(3.0)


def test_truthful_round_revenue():
    world = _world(GspTruthfulMechanism())
    updated, record = run_round(world, RoundStreams(0, 0, "gsp-truthful"))
    assert record.revenue == pytest.approx(6.5)
    assert updated.round == 1
    assert updated.cumulative_revenue == pytest.approx(6.5)


def test_round_without_active_bidders_terminates():
    """A round with no active bidder raises SimulationTerminated."""
    world = _world(GspTruthfulMechanism())
    world = dataclasses.replace(world, states=tuple(s.model_copy(update={"active": False}) for s in world.states))
    with pytest.raises(SimulationTerminated):
        run_round(world, RoundStreams(0, 0, "gsp-truthful"))


def test_world_pads_rounds_after_market_empties():
    """Rounds after the market empties record zero revenue."""
    config = _config(gamma=[0.01, 0.01, 0.01], rounds=30, outcome="click-sampled", ctr=[0.01, 0.01])
    records = run_world(config, 0, "gsp-truthful", [10.0, 8.0, 5.0])
    assert len(records) == 30
    assert [r.round for r in records] == list(range(1, 31))
    assert records[-1].active_count == 0
    assert records[-1].revenue == 0.0


def test_convergence_stops_after_min_seeds():
    """Convergence stopping waits for min_seeds."""
    config = _config(seeds=40, batch_size=5, min_seeds=10, convergence_tol=1e9)
    assert run_simulation(config).seeds == 10


def test_worker_count_does_not_change_results():
    """The process pool gives the same rows as the serial run."""
    config = _config(fixed_valuations=None, seeds=4, batch_size=2)
    parallel = config.model_copy(update={"workers": 2})
    assert run_simulation(config).rows == run_simulation(parallel).rows


def test_config_digest_is_stable():
    """The digest is stable and changes with the settings."""
    assert config_digest(_config()) == config_digest(_config())
    assert config_digest(_config()) != config_digest(_config(rounds=6))
    assert len(config_digest(_config())) == 16


def test_valuations_shared_and_bounded():
    """Valuation draws are reproducible and stay inside the spread."""
    a = draw_valuations(3, 1, 10, 10.0, 0.1)
    assert a == draw_valuations(3, 1, 10, 10.0, 0.1)
    assert a != draw_valuations(3, 2, 10, 10.0, 0.1)
    assert all(9.0 <= v <= 11.0 for v in a)
    assert draw_valuations(3, 1, 2, 10.0, 0.1, fixed=[4.0, 2.0]) == [4.0, 2.0]


def test_simulation_config_requires_k_below_n():
    with pytest.raises(ValueError, match="k < n required"):
        _config(ctr=[1.0, 0.5, 0.2])


def _row(mechanism, r, cum, active=3.0):
    return MetricsRow(round=r, mechanism=mechanism, mean_cum_revenue=cum, mean_active_bidders=active, mean_round_revenue=0.0)


def test_compare_mechanisms_overtaking_round():
    """The overtaking round is the first round from which coop stays ahead."""
    rows = [_row("coop-optimizer", r, c, 3.0) for r, c in enumerate([1.0, 3.0, 6.0], 1)]
    rows += [_row("gsp-truthful", r, c, 2.0) for r, c in enumerate([2.0, 3.0, 5.0], 1)]
    report = compare_mechanisms(MetricsTable(rows=rows, seeds=1))
    assert report.overtaking_round == 2
    assert report.coop_overtakes
    assert report.coop_retains_no_fewer
    assert report.final_cum_revenue == {"coop-optimizer": 6.0, "gsp-truthful": 5.0}


def test_compare_mechanisms_never_overtakes():
    """No overtaking round when coop ends behind."""
    rows = [_row("coop-optimizer", r, c) for r, c in enumerate([1.0, 2.0], 1)]
    rows += [_row("gsp-truthful", r, c) for r, c in enumerate([2.0, 4.0], 1)]
    report = compare_mechanisms(MetricsTable(rows=rows))
    assert report.overtaking_round is None
    assert not report.coop_overtakes


def test_compare_mechanisms_needs_both_curves():
    """Comparison needs both mechanisms."""
    with pytest.raises(ContractViolation):
        compare_mechanisms(MetricsTable(rows=[_row("gsp-truthful", 1, 1.0)]))


def test_variants_match_separate_runs():
    """Sharing solved sub-markets across variants leaves every table unchanged."""
    base = _config(mechanisms=["gsp-truthful", "coop-optimizer"], seeds=2, rounds=12, fixed_valuations=None)
    configs = {
        "weighted": base,
        "unweighted": base.model_copy(update={"weighting": False, "outcome": "slot-allocated"}),
    }
    tables = run_variants(configs)
    assert list(tables) == ["weighted", "unweighted"]
    for name, config in configs.items():
        assert tables[name] == run_simulation(config)


def test_variants_need_a_shared_seed_count():
    """Variants run over one seed range."""
    with pytest.raises(ContractViolation, match="seed count"):
        run_variants({"a": _config(seeds=2), "b": _config(seeds=3)})
    with pytest.raises(ContractViolation):
        run_variants({})


def test_worlds_of_one_seed_share_the_market_solve():
    """Without drop-outs each cooperative world solves only the full market, once per seed."""
    on = _config(mechanisms=["coop-optimizer"], rounds=3, dropouts=False)
    off = on.model_copy(update={"weighting": False})
    solved = SolvedMarkets()
    run_seed(on, 0, solved)
    run_seed(off, 0, solved)
    assert (solved.misses, solved.hits, len(solved)) == (1, 1, 1)

    result = run_seed_variants({"on": on, "off": off}, 0)
    assert result == {"on": run_seed(on, 0), "off": run_seed(off, 0)}
