"""
Repeated-auction harness.

Each seed is an independent world per mechanism, with valuations shared
across mechanisms. A round forms bids, runs GSP, samples outcomes, updates
engagement, then samples drop-outs. Seeds may run in a process pool; the
per-round means are reduced in seed order so output does not depend on the
worker count. The worlds of one seed share the optimizer's solved sub-markets.
"""

import dataclasses
import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from engine.gsp_auction import allocate
from engine.mechanism_protocol import BiddingMechanism
from engine.registry import build_mechanism
from optimizer.errors import ContractViolation, SimulationTerminated
from optimizer.memory import SolvedMarkets
from optimizer.schemas.market import Market
from optimizer.schemas.simulation import (
    BidderState,
    MetricsRow,
    MetricsTable,
    OutcomeDefinition,
    RoundRecord,
    SimulationConfig,
)
from sim.dropout import dropout_probability, record_outcome
from sim.seeding import RoundStreams, draw_valuations

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class World:
    """State of one simulated market under one mechanism."""

    market: Market
    states: Tuple[BidderState, ...]
    mechanism: BiddingMechanism
    outcome: OutcomeDefinition = "click-sampled"
    dropouts: bool = True
    round: int = 0
    cumulative_revenue: float = 0.0

    @property
    def active(self) -> List[int]:
        return [pos for pos, s in enumerate(self.states) if s.active]


def new_world(
    config: SimulationConfig,
    valuations: List[float],
    mechanism: str,
    solved: Optional[SolvedMarkets] = None,
) -> World:
    market = Market(ctr=list(config.ctr), valuations=valuations, reserve=config.reserve)
    states = tuple(
        BidderState.fresh(bidder_id, v, g)
        for bidder_id, v, g in zip(market.ids, valuations, config.gamma)
    )
    return World(
        market=market,
        states=states,
        mechanism=build_mechanism(mechanism, weighting=config.weighting, solved=solved),
        outcome=config.outcome,
        dropouts=config.dropouts,
    )


def run_round(world: World, streams: RoundStreams) -> Tuple[World, RoundRecord]:
    """Play one round. Raises SimulationTerminated when no bidder is active."""
    market = world.market
    draws = streams.draw(market.n, market.k)
    active = world.active
    if not active:
        raise SimulationTerminated(f"no active bidders left before round {world.round + 1}")

    bids, participants = world.mechanism.bids(market, active, draws.entry)
    outcome = allocate(market, bids, participants)

    clicked = [0] * market.n
    for j, winner in enumerate(outcome.slot_winner):
        if winner is None:
            continue
        pos = market.position_of(winner)
        if world.outcome == "slot-allocated":
            clicked[pos] = 1
        else:
            clicked[pos] = int(draws.clicks[j] < market.ctr[j])

    states = list(world.states)
    for pos in active:
        state = record_outcome(states[pos], clicked[pos])
        if world.dropouts and not draws.stays[pos] < dropout_probability(state):
            state = state.model_copy(update={"active": False})
        states[pos] = state

    cumulative = world.cumulative_revenue + outcome.revenue
    record = RoundRecord(
        round=world.round + 1,
        revenue=outcome.revenue,
        cumulative_revenue=cumulative,
        active_count=sum(1 for s in states if s.active),
        clicked=clicked,
    )
    updated = dataclasses.replace(
        world, states=tuple(states), round=world.round + 1, cumulative_revenue=cumulative
    )
    return updated, record


def run_world(
    config: SimulationConfig,
    seed_index: int,
    mechanism: str,
    valuations: List[float],
    solved: Optional[SolvedMarkets] = None,
) -> List[RoundRecord]:
    """All rounds of one world. After the last bidder leaves, remaining rounds record zero revenue."""
    world = new_world(config, valuations, mechanism, solved)
    streams = RoundStreams(config.master_seed, seed_index, mechanism)
    records: List[RoundRecord] = []
    for _ in range(config.rounds):
        try:
            world, record = run_round(world, streams)
        except SimulationTerminated:
            logger.debug("seed %d, %s: market emptied at round %d", seed_index, mechanism, world.round)
            record = RoundRecord(
                round=len(records) + 1,
                revenue=0.0,
                cumulative_revenue=world.cumulative_revenue,
                active_count=0,
                clicked=[0] * world.market.n,
            )
        records.append(record)
    return records


def run_seed(
    config: SimulationConfig,
    seed_index: int,
    solved: Optional[SolvedMarkets] = None,
) -> Dict[str, List[RoundRecord]]:
    if solved is None:
        solved = SolvedMarkets()
    valuations = draw_valuations(
        config.master_seed,
        seed_index,
        config.n,
        config.base_value,
        config.spread,
        config.fixed_valuations,
    )
    return {m: run_world(config, seed_index, m, valuations, solved) for m in config.mechanisms}


def run_seed_variants(configs: Dict[str, SimulationConfig], seed_index: int) -> Dict[str, Dict[str, List[RoundRecord]]]:
    """One seed under every configuration, sharing solved sub-markets between them."""
    solved = SolvedMarkets()
    results = {name: run_seed(config, seed_index, solved) for name, config in configs.items()}
    logger.debug("seed %d: %d sub-markets solved, %d reused", seed_index, solved.misses, solved.hits)
    return results


def config_digest(config: SimulationConfig) -> str:
    return hashlib.sha256(config.model_dump_json().encode("utf-8")).hexdigest()[:16]


class _Accumulator:
    """Running per-(mechanism, round) sums, fed in seed order."""

    def __init__(self, mechanisms: List[str], rounds: int) -> None:
        self.seeds = 0
        self.sums = {m: [[0.0, 0.0, 0.0] for _ in range(rounds)] for m in mechanisms}

    def add(self, result: Dict[str, List[RoundRecord]]) -> None:
        self.seeds += 1
        for mechanism, records in result.items():
            totals = self.sums[mechanism]
            for r in records:
                row = totals[r.round - 1]
                row[0] += r.cumulative_revenue
                row[1] += r.active_count
                row[2] += r.revenue

    def final_means(self) -> Dict[str, float]:
        return {m: rows[-1][0] / self.seeds for m, rows in self.sums.items()}

    def table(self, digest: str) -> MetricsTable:
        rows = [
            MetricsRow(
                round=i + 1,
                mechanism=mechanism,
                mean_cum_revenue=cum / self.seeds,
                mean_active_bidders=active / self.seeds,
                mean_round_revenue=revenue / self.seeds,
            )
            for mechanism in sorted(self.sums)
            for i, (cum, active, revenue) in enumerate(self.sums[mechanism])
        ]
        return MetricsTable(rows=rows, config_digest=digest, seeds=self.seeds)


def _map_seeds(work, seeds: Iterable[int], executor: Optional[ProcessPoolExecutor]) -> Iterator:
    return executor.map(work, seeds) if executor else map(work, seeds)


def run_simulation(config: SimulationConfig) -> MetricsTable:
    """
    Average per-round metrics across seeds for each configured mechanism.
    Seeds run in batches; with convergence_tol set, the run stops after the
    first batch (past min_seeds) that moves every mechanism's final mean
    cumulative revenue by less than the tolerance.
    """
    acc = _Accumulator(list(config.mechanisms), config.rounds)
    work = partial(run_seed, config)
    previous: Dict[str, float] = {}
    executor = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for start in range(0, config.seeds, config.batch_size):
            batch = range(start, min(start + config.batch_size, config.seeds))
            for result in _map_seeds(work, batch, executor):
                acc.add(result)
            means = acc.final_means()
            logger.debug("after %d seeds: final mean cumulative revenue %s", acc.seeds, means)
            if config.convergence_tol is not None and previous and acc.seeds >= config.min_seeds:
                if all(abs(means[m] - previous[m]) < config.convergence_tol for m in means):
                    logger.info("converged after %d seeds", acc.seeds)
                    break
            previous = means
    finally:
        if executor is not None:
            executor.shutdown()
    return acc.table(config_digest(config))


def run_variants(configs: Dict[str, SimulationConfig]) -> Dict[str, MetricsTable]:
    """
    Simulate several configurations over the same seeds; each seed runs every
    configuration in one task so their worlds share solved sub-markets. Every
    seed runs; convergence_tol is not applied. Tables match run_simulation
    on each configuration without convergence stopping.
    """
    if not configs:
        raise ContractViolation("at least one configuration is required")
    seeds = {c.seeds for c in configs.values()}
    if len(seeds) != 1:
        raise ContractViolation(f"configurations must share the seed count, got {sorted(seeds)}")
    (num_seeds,) = seeds
    workers = max(c.workers for c in configs.values())

    accs = {name: _Accumulator(list(c.mechanisms), c.rounds) for name, c in configs.items()}
    work = partial(run_seed_variants, configs)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for result in _map_seeds(work, range(num_seeds), executor):
            for name, records in result.items():
                accs[name].add(records)
    finally:
        if executor is not None:
            executor.shutdown()
    return {name: accs[name].table(config_digest(configs[name])) for name in configs}
