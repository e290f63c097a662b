"""
Reference policies: Tiresias (discretized two-dimensional attained service
with skew-based consolidation) and Gandiva (network-agnostic placement with
opportunistic migration to better-consolidated GPUs).
"""

import bisect
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from core.exceptions import ConfigError
from core.job import JobState
from core.topology import CapacityLedger, Placement, Tier, find_placement
from .base import OfferDecision, SchedulingPolicy, TierFeasibility, arrival_key, plan_preemptions

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (3600.0, 36000.0)
DEFAULT_MIGRATION_PERIOD = 1800.0


@dataclass
class TiresiasState:
    queue_thresholds: List[float] = field(default_factory=lambda: list(DEFAULT_THRESHOLDS))
    max_preemptions_per_round: int = 4

    def __post_init__(self):
        thresholds = [float(t) for t in self.queue_thresholds]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ConfigError(f"tiresias.thresholds_gpu_s must be strictly ascending: {thresholds}")
        if self.max_preemptions_per_round < 0:
            raise ConfigError("tiresias.max_preemptions_per_round must be >= 0")
        self.queue_thresholds = thresholds

    def queue_index(self, attained_service: float) -> int:
        # a job sitting exactly on a boundary belongs to the lower-priority queue
        return bisect.bisect_right(self.queue_thresholds, attained_service)

    @classmethod
    def from_config(cls, section: Dict) -> "TiresiasState":
        return cls(
            queue_thresholds=list(section.get("thresholds_gpu_s", DEFAULT_THRESHOLDS)),
            max_preemptions_per_round=int(section.get("max_preemptions_per_round", 4)),
        )


def tiresias_priority(job: JobState, now: float, state: TiresiasState) -> Tuple[int, float]:
    attained = job.attained_service(now)
    return state.queue_index(attained), attained


def tiresias_on_offer(high_skew: bool, demand: int, feasibility: TierFeasibility,
                      gpus_per_machine: int, gpus_per_rack: int) -> OfferDecision:
    """High-skew jobs hold out for their most consolidated tier; others take anything"""
    if high_skew:
        if demand <= gpus_per_machine:
            target = Tier.MACHINE
        elif demand <= gpus_per_rack:
            target = Tier.RACK
        else:
            target = Tier.NETWORK
        return OfferDecision.accept(target) if feasibility.feasible(target) else OfferDecision.REJECT
    best = feasibility.best_feasible()
    return OfferDecision.accept(best) if best is not None else OfferDecision.REJECT


def gandiva_on_offer(feasibility: TierFeasibility) -> OfferDecision:
    best = feasibility.best_feasible()
    return OfferDecision.accept(best) if best is not None else OfferDecision.REJECT


class TiresiasPolicy(SchedulingPolicy):
    name = "tiresias"

    def __init__(self, state: Optional[TiresiasState] = None):
        super().__init__()
        self.state = state or TiresiasState()

    def _key(self, job: JobState, now: float):
        queue, attained = tiresias_priority(job, now, self.state)
        return (queue, attained, job.spec.arrival_time, job.job_id)

    def priority_order(self, waiting, now):
        return sorted(waiting, key=lambda job: self._key(job, now))

    def _high_skew(self, job: JobState) -> bool:
        return self.catalog.get(job.spec.model_name).is_high_skew

    def decide(self, job, feasibility, now):
        return tiresias_on_offer(
            self._high_skew(job), job.spec.gpu_demand, feasibility,
            self.topology.gpus_per_machine, self.topology.gpus_per_rack,
        )

    def tier_cap(self, job: JobState) -> Tier:
        if self._high_skew(job):
            return self.topology.best_tier_for(job.spec.gpu_demand)
        return Tier.NETWORK

    def select_preemption_victims(self, running, waiting, ledger: CapacityLedger, now):
        if not waiting or not running or self.state.max_preemptions_per_round == 0:
            return []
        keyed = {job.job_id: self._key(job, now) for job in running}
        # lowest priority first
        by_priority = sorted(running, key=lambda j: keyed[j.job_id], reverse=True)

        def candidates_for(job: JobState) -> List[JobState]:
            queue = self._key(job, now)[0]
            return [r for r in by_priority if keyed[r.job_id][0] > queue]

        victims = plan_preemptions(
            self.priority_order(waiting, now), ledger, self.topology,
            cap_for=self.tier_cap,
            candidates_for=candidates_for,
            max_victims=self.state.max_preemptions_per_round,
        )
        if victims:
            logger.debug("Tiresias preempting %s at t=%.1f", [v.job_id for v in victims], now)
        return victims


@dataclass
class GandivaState:
    migration_check_period: float = DEFAULT_MIGRATION_PERIOD

    def __post_init__(self):
        if not self.migration_check_period > 0:
            raise ConfigError("gandiva.migration_period_s must be > 0")

    @classmethod
    def from_config(cls, section: Dict) -> "GandivaState":
        return cls(float(section.get("migration_period_s", DEFAULT_MIGRATION_PERIOD)))


def gandiva_migrate(running: Sequence[JobState], ledger: CapacityLedger,
                    topo) -> List[Tuple[JobState, Placement]]:
    """
    Move running jobs, in arrival order, onto a strictly better tier built
    from free GPUs only. The ledger passed in is left untouched.
    """
    scratch = ledger.copy()
    moves = []
    for job in sorted(running, key=arrival_key):
        tier = job.current_tier
        if tier is None or tier is Tier.MACHINE:
            continue
        target = find_placement(job.spec.gpu_demand, Tier(tier - 1), scratch, topo)
        if target is None:
            continue
        scratch.allocate(target)
        scratch.release(job.placement)
        moves.append((job, target))
    return moves


class GandivaPolicy(SchedulingPolicy):
    name = "gandiva"

    def __init__(self, state: Optional[GandivaState] = None):
        super().__init__()
        self.state = state or GandivaState()
        self.migration_period = self.state.migration_check_period

    def priority_order(self, waiting, now):
        return sorted(waiting, key=arrival_key)

    def decide(self, job, feasibility, now):
        return gandiva_on_offer(feasibility)

    def migrations(self, running, ledger, now):
        moves = gandiva_migrate(running, ledger, self.topology)
        for job, target in moves:
            logger.debug("Gandiva migrating %s %s -> %s at t=%.1f", job.job_id,
                         job.current_tier.label, target.tier.label, now)
        return moves
