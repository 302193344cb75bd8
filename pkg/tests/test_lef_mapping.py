"""Unit tests for LEF bids, the mapping LP and the deviation report."""

import numpy as np
import pytest

from engine.gsp_auction import truthful_revenue
from engine.lef_mapping import (
    build_mapping_lp,
    candidate_set_count,
    equilibrium_report,
    lef_bids,
    map_to_correlated,
    winning_set_size,
)
from optimizer.errors import ContractViolation
from optimizer.schemas.game import UtilityVector
from optimizer.schemas.market import Market
from optimizer.schemas.profile import CorrelatedBidProfile, ProfileEntry


def _two_slot_market(ctr=(1.0, 0.5)):
    return Market(ctr=list(ctr), valuations=[10.0, 6.0, 1.0])


def _one_slot_market():
    return Market(ctr=[1.0], valuations=[10.0, 6.0])


def _point_mass(market, members):
    lef = lef_bids(market, members)
    return CorrelatedBidProfile(entries=[ProfileEntry(coalition=sorted(members), probability=1.0, lef=lef)])


def test_lef_bids_two_slots():
    """Two slots: the lower winner is indifferent to the slot above."""
    lef = lef_bids(_two_slot_market(), [2, 1])
    assert lef.members == [1, 2]
    assert lef.bids == pytest.approx([10.0, 3.0])
    assert lef.payments == pytest.approx([3.0, 0.0])


def test_lef_bids_single_winner_bids_valuation():
    """A lone winner bids its valuation and pays the reserve."""
    lef = lef_bids(_one_slot_market(), [2])
    assert lef.bids == [6.0]
    assert lef.payments == [0.0]


def test_lef_bids_equal_ctrs_collapse_to_reserve():
    """Equal CTRs collapse the lower prices to the reserve."""
    lef = lef_bids(_two_slot_market((1.0, 1.0)), [1, 2])
    assert lef.payments == pytest.approx([0.0, 0.0])


def test_lef_slot_two_envy_is_zero():
    """The slot-2 winner gains nothing by swapping up."""
    market = _two_slot_market()
    lef = lef_bids(market, [1, 2])
    stay = market.ctr[1] * (6.0 - lef.payments[1])
    move_up = market.ctr[0] * (6.0 - lef.payments[0])
    assert stay == pytest.approx(move_up)


def test_lef_bids_wrong_set_size():
    """Winning sets must hold exactly k distinct bidders."""
    with pytest.raises(ContractViolation):
        lef_bids(_two_slot_market(), [1])
    with pytest.raises(ContractViolation):
        lef_bids(_two_slot_market(), [1, 1])


def test_bid_vector_puts_outsiders_on_reserve():
    """Bidders outside the winning set bid the reserve."""
    market = Market(ctr=[1.0, 0.5], valuations=[10.0, 6.0, 4.0], reserve=1.0)
    vector = lef_bids(market, [1, 3]).bid_vector(market)
    assert vector.bids[1] == 1.0
    assert vector.bids[0] == 10.0


def test_mapping_lp_size_two_bidders():
    """Two bidders, one slot: two set probabilities plus three residuals."""
    lp = build_mapping_lp(_one_slot_market(), UtilityVector(x=[8.0, 2.0, 0.0]))
    assert lp.num_variables == 5
    assert len(lp.constraints) == 7


def test_mapping_lp_size_ten_bidders():
    """Ten bidders, five slots: 252 sets plus eleven residuals."""
    market = Market(ctr=[0.9, 0.72, 0.576, 0.4608, 0.36864], valuations=[10.0 + 0.1 * i for i in range(10)])
    assert candidate_set_count(market) == 252
    lp = build_mapping_lp(market, UtilityVector(x=[0.0] * 11), weighting=False)
    assert lp.num_variables == 252 + 11


def test_mapping_lp_weighting_off_is_residual_sum():
    """Without weighting the cost is the residual sum only."""
    lp = build_mapping_lp(_one_slot_market(), UtilityVector(x=[8.0, 2.0, 0.0]), weighting=False)
    assert lp.cost == [0.0, 0.0, 1.0, 1.0, 1.0]


def test_map_weighting_on_concentrates_on_top_set():
    """Weighting puts all mass on the top-valuation set."""
    result = map_to_correlated(_one_slot_market(), UtilityVector(x=[8.0, 2.0, 0.0]), weighting=True)
    entries = result.profile.entries
    assert len(entries) == 1
    assert entries[0].coalition == [1]
    assert entries[0].probability == pytest.approx(1.0)
    assert result.residuals == pytest.approx([8.0, 8.0, 0.0], abs=1e-9)
    assert result.objective == pytest.approx(-64.0)


def test_map_weighting_off_objective():
    """Without weighting the nucleolus is matched at the least residual sum."""
    result = map_to_correlated(_one_slot_market(), UtilityVector(x=[8.0, 2.0, 0.0]), weighting=False)
    assert result.objective == pytest.approx(12.8)
    probs = {tuple(e.coalition): e.probability for e in result.profile.entries}
    assert probs[(1,)] == pytest.approx(0.2)
    assert probs[(2,)] == pytest.approx(0.8)


def test_map_reproducible_target_has_zero_bidder_residuals():
    """A target produced by some distribution is matched exactly."""
    market = _two_slot_market()
    lef = lef_bids(market, [1, 2])
    eu = [market.ctr[j] * (market.valuations[market.position_of(pid)] - pay)
          for j, (pid, pay) in enumerate(zip(lef.members, lef.payments))]
    x = UtilityVector(x=[5.0, eu[0], eu[1], 0.0])
    result = map_to_correlated(market, x, weighting=False)
    assert result.residuals[1:] == pytest.approx([0.0, 0.0, 0.0], abs=1e-9)
    assert result.objective == pytest.approx(abs(result.profile.expected_revenue - 5.0), abs=1e-9)


def test_profile_recomputes_expectations():
    """Expected utilities and revenue follow the entries."""
    market = Market(ctr=[0.9, 0.72], valuations=[9.5, 10.4, 10.1, 9.2])
    result = map_to_correlated(market, UtilityVector(x=[20.0, 3.0, 2.0, 1.0, 0.0]), weighting=False)
    profile = result.profile
    assert sum(e.probability for e in profile.entries) == pytest.approx(1.0, abs=1e-9)
    revenue = sum(
        e.probability * sum(market.ctr[j] * p for j, p in enumerate(e.lef.payments)) for e in profile.entries
    )
    assert profile.expected_revenue == pytest.approx(revenue, abs=1e-9)
    assert profile.expected_revenue <= truthful_revenue(market) + 1e-9


def test_map_rejects_wrong_vector_length():
    """The utility vector must have one entry per player."""
    with pytest.raises(ContractViolation):
        map_to_correlated(_one_slot_market(), UtilityVector(x=[1.0, 2.0]))


def test_sample_walks_sorted_entries():
    """sample(u) walks entries by descending probability."""
    market = _one_slot_market()
    profile = CorrelatedBidProfile(
        entries=[
            ProfileEntry(coalition=[2], probability=0.8, lef=lef_bids(market, [2])),
            ProfileEntry(coalition=[1], probability=0.2, lef=lef_bids(market, [1])),
        ]
    )
    assert profile.sample(0.0).coalition == [2]
    assert profile.sample(0.79).coalition == [2]
    assert profile.sample(0.81).coalition == [1]


def test_profile_probabilities_must_sum_to_one():
    """Entry probabilities must form a distribution."""
    market = _one_slot_market()
    with pytest.raises(ValueError):
        CorrelatedBidProfile(entries=[ProfileEntry(coalition=[1], probability=0.5, lef=lef_bids(market, [1]))])


def test_report_top_set_has_no_profitable_deviation():
    """The top-valuation set admits no profitable unilateral deviation."""
    market = _two_slot_market()
    report = equilibrium_report(market, _point_mass(market, [1, 2]))
    entry = report.entries[0]
    assert entry.bidder_gains[2] <= 1e-9
    assert report.max_gain <= 1e-9


def test_report_flags_excluded_high_bidder():
    """Excluding the highest bidder shows up as its deviation gain."""
    market = Market(ctr=[1.0], valuations=[10.0, 6.0, 5.0])
    report = equilibrium_report(market, _point_mass(market, [3]))
    assert report.max_gain > 0
    assert report.entries[0].deviator == 1
    assert report.entries[0].bidder_gains[1] == pytest.approx(5.0)
    assert report.expected_gain == pytest.approx(report.max_gain)


def test_report_grid_minimum():
    """The deviation grid has a minimum size."""
    market = _two_slot_market()
    with pytest.raises(ContractViolation):
        equilibrium_report(market, _point_mass(market, [1, 2]), grid=5)


def test_winning_set_size_thin_market():
    thin = Market(ctr=[1.0, 0.5], valuations=[4.0], allow_thin=True)
    assert winning_set_size(thin) == 1
    assert np.isclose(lef_bids(thin, [1]).bids[0], 4.0)


def test_report_outsider_on_reserve_is_not_a_deviation():
    """An outsider's recommended reserve bid keeps it out of the auction."""
    market = Market(ctr=[1.0, 1.0], valuations=[10.0, 6.0, 5.0])
    profile = _point_mass(market, [2, 3])
    assert profile.entries[0].lef.bids == pytest.approx([6.0, 0.0])
    entry = equilibrium_report(market, profile, grid=10).entries[0]
    # Bidder 1 gains only by entering above the reserve and taking slot 2.
    assert entry.deviator == 1
    assert entry.deviation_bid == pytest.approx(10.0 / 9.0)
    assert entry.bidder_gains[1] == pytest.approx(10.0)
    assert entry.bidder_gains[2] == pytest.approx(0.0, abs=1e-12)
    assert entry.bidder_gains[3] == pytest.approx(0.0, abs=1e-12)


def test_report_members_on_recommendation_gain_nothing():
    """Nobody gains against a lone winner bidding its valuation."""
    market = Market(ctr=[1.0], valuations=[10.0, 6.0, 5.0])
    entry = equilibrium_report(market, _point_mass(market, [1])).entries[0]
    assert entry.max_gain == pytest.approx(0.0, abs=1e-12)
    assert entry.bidder_gains == {1: 0.0, 2: 0.0, 3: 0.0}
