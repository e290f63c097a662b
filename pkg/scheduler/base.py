"""
Policy interface shared by Dally and the baseline schedulers.

The engine's global scheduler builds a ResourceOffer for each waiting job
and hands it to the policy, which plays the job's local scheduler and
answers with an OfferDecision.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from core.job import JobState
from core.latency import ProfileCatalog
from core.topology import CapacityLedger, ClusterTopology, Placement, Tier, find_placement

logger = logging.getLogger(__name__)


class OfferDecision(Enum):
    ACCEPT_MACHINE = "accept_machine"
    ACCEPT_RACK = "accept_rack"
    ACCEPT_NETWORK = "accept_network"
    REJECT = "reject"

    @property
    def tier(self) -> Optional[Tier]:
        return _DECISION_TIERS.get(self)

    @property
    def accepted(self) -> bool:
        return self is not OfferDecision.REJECT

    @classmethod
    def accept(cls, tier: Tier) -> "OfferDecision":
        return {Tier.MACHINE: cls.ACCEPT_MACHINE,
                Tier.RACK: cls.ACCEPT_RACK,
                Tier.NETWORK: cls.ACCEPT_NETWORK}[tier]


_DECISION_TIERS = {
    OfferDecision.ACCEPT_MACHINE: Tier.MACHINE,
    OfferDecision.ACCEPT_RACK: Tier.RACK,
    OfferDecision.ACCEPT_NETWORK: Tier.NETWORK,
}


@dataclass(frozen=True)
class TierFeasibility:
    machine: bool
    rack: bool
    network: bool

    def feasible(self, tier: Tier) -> bool:
        return (self.machine, self.rack, self.network)[tier]

    def best_feasible(self) -> Optional[Tier]:
        for tier in Tier:
            if self.feasible(tier):
                return tier
        return None


@dataclass(frozen=True)
class ResourceOffer:
    """Best available placement at each tier cap for one job's demand"""
    demand: int
    machine: Optional[Placement]
    rack: Optional[Placement]
    network: Optional[Placement]

    @classmethod
    def build(cls, demand: int, ledger: CapacityLedger, topo: ClusterTopology) -> "ResourceOffer":
        machine = find_placement(demand, Tier.MACHINE, ledger, topo)
        rack = machine or find_placement(demand, Tier.RACK, ledger, topo)
        network = rack or find_placement(demand, Tier.NETWORK, ledger, topo)
        return cls(demand=demand, machine=machine, rack=rack, network=network)

    @property
    def feasibility(self) -> TierFeasibility:
        return TierFeasibility(
            machine=self.machine is not None,
            rack=self.rack is not None,
            network=self.network is not None,
        )

    @property
    def is_empty(self) -> bool:
        return self.network is None

    def placement_for(self, decision: OfferDecision) -> Optional[Placement]:
        tier = decision.tier
        if tier is None:
            return None
        return (self.machine, self.rack, self.network)[tier]


class SchedulingPolicy:
    """Base policy: FIFO order, accepts the most consolidated feasible tier"""

    name = "base"
    migration_period: Optional[float] = None

    def __init__(self):
        self.topology: Optional[ClusterTopology] = None
        self.catalog: Optional[ProfileCatalog] = None

    def bind(self, topology: ClusterTopology, catalog: ProfileCatalog) -> None:
        self.topology = topology
        self.catalog = catalog

    def priority_order(self, waiting: Sequence[JobState], now: float) -> List[JobState]:
        return sorted(waiting, key=arrival_key)

    def decide(self, job: JobState, feasibility: TierFeasibility, now: float) -> OfferDecision:
        tier = feasibility.best_feasible()
        return OfferDecision.accept(tier) if tier is not None else OfferDecision.REJECT

    def on_offer(self, job: JobState, offer: ResourceOffer, now: float) -> OfferDecision:
        return self.decide(job, offer.feasibility, now)

    def select_preemption_victims(self, running: Sequence[JobState], waiting: Sequence[JobState],
                                  ledger: CapacityLedger, now: float) -> List[JobState]:
        return []

    def migrations(self, running: Sequence[JobState], ledger: CapacityLedger,
                   now: float) -> List[Tuple[JobState, Placement]]:
        return []

    def on_job_started(self, job: JobState, now: float) -> None:
        pass


def arrival_key(job: JobState):
    return (job.spec.arrival_time, job.job_id)


def _release_set(job: JobState, cap: Tier, candidates: Sequence[JobState], ledger: CapacityLedger,
                 topo: ClusterTopology, budget: int) -> Optional[Tuple[List[JobState], Placement]]:
    """
    Fewest candidates whose release fits the job: a single victim if any one
    suffices, else the smallest prefix pruned to a minimal set
    """
    demand = job.spec.gpu_demand
    for candidate in candidates:
        trial = ledger.copy()
        trial.release(candidate.placement)
        placement = find_placement(demand, cap, trial, topo)
        if placement is not None:
            return [candidate], placement

    trial = ledger.copy()
    picked: List[JobState] = []
    fits = False
    for candidate in candidates:
        if len(picked) >= budget:
            break
        trial.release(candidate.placement)
        picked.append(candidate)
        if find_placement(demand, cap, trial, topo) is not None:
            fits = True
            break
    if not fits:
        return None

    for victim in reversed(list(picked)):
        if len(picked) == 1:
            break
        test = ledger.copy()
        for other in picked:
            if other is not victim:
                test.release(other.placement)
        if find_placement(demand, cap, test, topo) is not None:
            picked.remove(victim)

    final = ledger.copy()
    for victim in picked:
        final.release(victim.placement)
    return picked, find_placement(demand, cap, final, topo)


def plan_preemptions(ordered: Sequence[JobState], ledger: CapacityLedger, topo: ClusterTopology,
                     cap_for: Callable[[JobState], Optional[Tier]],
                     candidates_for: Callable[[JobState], List[JobState]],
                     max_victims: int) -> List[JobState]:
    """
    Replay one round of offers on a scratch ledger. Jobs that fit at their
    tier cap reserve their placement; jobs that don't may claim running
    victims from `candidates_for`. A running job in `ordered` is being moved
    to a better tier: its own GPUs count as free for it, and it is returned
    among the jobs to preempt when the move works out. Every preempted job
    counts against `max_victims`.
    """
    chosen: List[JobState] = []
    if max_victims <= 0:
        return chosen
    scratch = ledger.copy()
    chosen_ids = set()
    for job in ordered:
        if len(chosen) >= max_victims:
            break
        if job.job_id in chosen_ids:
            continue
        cap = cap_for(job)
        if cap is None:
            continue
        moving = job.is_running
        trial = scratch.copy() if moving else scratch
        if moving:
            trial.release(job.placement)
        placement = find_placement(job.spec.gpu_demand, cap, trial, topo)
        victims: List[JobState] = []
        if placement is None:
            budget = max_victims - len(chosen) - (1 if moving else 0)
            candidates = [c for c in candidates_for(job)
                          if c.job_id not in chosen_ids and c.job_id != job.job_id]
            if budget <= 0 or not candidates:
                continue
            result = _release_set(job, cap, candidates, trial, topo, budget)
            if result is None:
                continue
            victims, placement = result
        if moving:
            scratch = trial
            chosen.append(job)
            chosen_ids.add(job.job_id)
        for victim in victims:
            scratch.release(victim.placement)
            chosen.append(victim)
            chosen_ids.add(victim.job_id)
        scratch.allocate(placement)
        if victims:
            logger.debug("Job %s claims %s via preemption", job.job_id,
                         [v.job_id for v in victims])
    return chosen
