"""Mechanism registry: maps configured mechanism names to fresh mechanism instances."""

from typing import Callable, Dict, List, Optional, TYPE_CHECKING

from engine.coop_optimizer_mechanism import CoopOptimizerMechanism
from engine.gsp_truthful_mechanism import GspTruthfulMechanism
from optimizer.errors import ContractViolation
from optimizer.memory import SolvedMarkets

if TYPE_CHECKING:
    from engine.mechanism_protocol import BiddingMechanism


MECHANISM_REGISTRY: Dict[str, Callable[..., "BiddingMechanism"]] = {
    "gsp-truthful": lambda weighting=True, solved=None: GspTruthfulMechanism(),
    "coop-optimizer": lambda weighting=True, solved=None: CoopOptimizerMechanism(weighting=weighting, solved=solved),
}

MECHANISM_NAMES: List[str] = sorted(MECHANISM_REGISTRY)


def build_mechanism(
    name: str,
    weighting: bool = True,
    solved: Optional[SolvedMarkets] = None,
) -> "BiddingMechanism":
    """
    New instance per simulated world; the cooperative mechanism carries its
    own profile cache and may share solved sub-markets with other worlds.
    """
    factory = MECHANISM_REGISTRY.get(name)
    if factory is None:
        raise ContractViolation(f"unknown mechanism {name!r}; expected one of {MECHANISM_NAMES}")
    return factory(weighting=weighting, solved=solved)
