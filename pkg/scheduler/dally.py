"""
Dally: delay scheduling across network tiers with network-sensitive
preemption and auto-tuned delay timers.

Jobs are offered resources in increasing order of Nw_sens, the ratio of
work completed to normalized running time. Each job's local scheduler
accepts a machine-level placement whenever one is offered, and only
relaxes to rack and then network placements once its starvation time
passes the machine and rack delay timers. Both timers are compared against
the same starvation clock.

A running job stuck below its best tier whose Nw_sens has dropped past the
preemption margin is planned like a waiting job: it may displace
better-progressing jobs to move back to its best tier.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigError
from core.job import JobState, PriorityInputs
from core.topology import CapacityLedger, Tier
from .base import OfferDecision, SchedulingPolicy, TierFeasibility, plan_preemptions

logger = logging.getLogger(__name__)

DEFAULT_T_MC = 43200.0        # 12 h
DEFAULT_T_RK = 86400.0        # 24 h on the shared starvation clock
DEFAULT_HISTORY_LIMIT = 604800.0
NEUTRAL_NW_SENS = 1.0


class DallyMode(Enum):
    AUTO = "auto"
    MANUAL = "manual"
    NOWAIT = "nowait"
    FULLY_CONSOLIDATED = "fullyconsolidated"


@dataclass
class DallyConfig:
    mode: DallyMode = DallyMode.AUTO
    t_mc: float = DEFAULT_T_MC
    t_rk: float = DEFAULT_T_RK
    history_limit: float = DEFAULT_HISTORY_LIMIT
    preemption_margin: float = 0.5
    max_preemptions_per_round: int = 4

    def __post_init__(self):
        if self.t_mc < 0 or self.t_rk < 0:
            raise ConfigError("Dally delay timers must be >= 0")
        if self.preemption_margin < 0:
            raise ConfigError("dally.preemption_margin must be >= 0")
        if self.max_preemptions_per_round < 0:
            raise ConfigError("dally.max_preemptions_per_round must be >= 0")
        if not self.history_limit > 0:
            raise ConfigError("dally.history_limit_s must be > 0")

    @classmethod
    def from_config(cls, section: Dict, mode: Optional[str] = None) -> "DallyConfig":
        raw_mode = mode or section.get("mode", "auto")
        try:
            parsed = DallyMode(raw_mode)
        except ValueError:
            raise ConfigError(f"Unknown dally.mode {raw_mode!r}")
        return cls(
            mode=parsed,
            t_mc=float(section.get("t_mc_s", DEFAULT_T_MC)),
            t_rk=float(section.get("t_rk_s", DEFAULT_T_RK)),
            history_limit=float(section.get("history_limit_s", DEFAULT_HISTORY_LIMIT)),
            preemption_margin=float(section.get("preemption_margin", 0.5)),
            max_preemptions_per_round=int(section.get("max_preemptions_per_round", 4)),
        )


def nw_sens(p: PriorityInputs) -> float:
    """
    Work completed over normalized running time. Lower means the job has
    been slowed more by its placements and deserves better offers.
    A job that has not run yet is treated as on schedule.
    """
    if p.run_time <= 0:
        return NEUTRAL_NW_SENS
    work_completed = p.iterations_completed / p.total_expected_iterations
    normalized_run = p.run_time / p.ideal_run_time
    return work_completed / normalized_run


def _nw_sens_key(job: JobState, now: float):
    return (nw_sens(job.priority_inputs(now)), job.spec.arrival_time, job.job_id)


def priority_order(jobs: Sequence[JobState], now: float) -> List[JobState]:
    return sorted(jobs, key=lambda job: _nw_sens_key(job, now))


class DelayHistory:
    """Accepted-offer starvation times per (tier, GPU demand)"""

    def __init__(self, history_time_limit: float = DEFAULT_HISTORY_LIMIT):
        self.history_time_limit = history_time_limit
        self.lists: Dict[Tuple[Tier, int], List[Tuple[float, float]]] = defaultdict(list)

    def record(self, tier: Tier, demand: int, accept_time: float, waited: float) -> None:
        if tier is Tier.NETWORK:
            return
        self.lists[(tier, demand)].append((accept_time, max(0.0, waited)))

    def recent(self, tier: Tier, demand: int, now: float) -> List[float]:
        return [
            waited for accept_time, waited in self.lists.get((tier, demand), ())
            if now - accept_time < self.history_time_limit
        ]


def _tuned_value(values: List[float], default: float) -> float:
    if not values:
        return default
    if len(values) == 1:
        return float(values[0])
    sample = np.asarray(values, dtype=float)
    return float(sample.mean() + 2.0 * sample.std(ddof=1))


def get_tuned_timers(demand: int, history: DelayHistory, now: float,
                     config: DallyConfig) -> Tuple[float, float]:
    """Windowed mean + 2 sample standard deviations of past waits"""
    return (
        _tuned_value(history.recent(Tier.MACHINE, demand, now), config.t_mc),
        _tuned_value(history.recent(Tier.RACK, demand, now), config.t_rk),
    )


def on_resource_offer(starvation: float, feasibility: TierFeasibility,
                      timers: Tuple[float, float]) -> OfferDecision:
    t_mc, t_rk = timers
    if feasibility.machine:
        return OfferDecision.ACCEPT_MACHINE
    if starvation < t_mc:
        return OfferDecision.REJECT
    if feasibility.rack:
        return OfferDecision.ACCEPT_RACK
    if starvation < t_rk:
        return OfferDecision.REJECT
    if feasibility.network:
        return OfferDecision.ACCEPT_NETWORK
    return OfferDecision.REJECT


class DallyPolicy(SchedulingPolicy):
    name = "dally"

    def __init__(self, config: Optional[DallyConfig] = None, name: Optional[str] = None):
        super().__init__()
        self.config = config or DallyConfig()
        if name:
            self.name = name
        self.history = DelayHistory(self.config.history_limit)
        # first round each waiting job was offered in since its clock last restarted
        self._first_round: Dict[str, float] = {}

    def base_timers(self, demand: int, now: float) -> Tuple[float, float]:
        mode = self.config.mode
        if mode is DallyMode.AUTO:
            return get_tuned_timers(demand, self.history, now, self.config)
        if mode is DallyMode.MANUAL:
            return self.config.t_mc, self.config.t_rk
        if mode is DallyMode.NOWAIT:
            return 0.0, 0.0
        return float("inf"), float("inf")

    def timers_for(self, demand: int, now: float) -> Tuple[float, float]:
        t_mc, t_rk = self.base_timers(demand, now)
        if demand > self.topology.gpus_per_rack:
            return 0.0, 0.0
        if demand > self.topology.gpus_per_machine:
            return 0.0, t_rk
        return t_mc, t_rk

    def priority_order(self, waiting, now):
        for job in waiting:
            self._first_round.setdefault(job.job_id, now)
        return priority_order(waiting, now)

    def passed_over(self, job: JobState, now: float) -> bool:
        """True once the job has sat through a round without being placed"""
        return self._first_round.get(job.job_id, now) < now

    def on_job_started(self, job, now):
        self._first_round.pop(job.job_id, None)

    def decide(self, job, feasibility, now):
        demand = job.spec.gpu_demand
        starvation = job.starvation(now)
        if self.config.mode is DallyMode.FULLY_CONSOLIDATED:
            target = self.topology.best_tier_for(demand)
            decision = OfferDecision.accept(target) if feasibility.feasible(target) else OfferDecision.REJECT
        else:
            decision = on_resource_offer(starvation, feasibility, self.timers_for(demand, now))
        # a job placed at its first round carries round latency, not a contention wait
        if decision.tier is not None and decision.tier is not Tier.NETWORK and self.passed_over(job, now):
            self.history.record(decision.tier, demand, now, starvation)
        return decision

    def acceptable_tier_cap(self, job: JobState, now: float) -> Tier:
        """Least consolidated tier the job would accept if offered right now"""
        demand = job.spec.gpu_demand
        if self.config.mode is DallyMode.FULLY_CONSOLIDATED:
            return self.topology.best_tier_for(demand)
        t_mc, t_rk = self.timers_for(demand, now)
        starvation = job.starvation(now)
        if starvation < t_mc:
            return Tier.MACHINE
        if starvation < t_rk:
            return Tier.RACK
        return Tier.NETWORK

    def restorable(self, running: Sequence[JobState], now: float) -> List[JobState]:
        """
        Running jobs placed below their best tier whose Nw_sens has fallen far
        enough that an on-schedule job would clear the preemption margin
        against them.
        """
        limit = NEUTRAL_NW_SENS / (1.0 + self.config.preemption_margin)
        return [
            job for job in running
            if job.current_tier > self.topology.best_tier_for(job.spec.gpu_demand)
            and nw_sens(job.priority_inputs(now)) < limit
        ]

    def select_preemption_victims(self, running, waiting, ledger: CapacityLedger, now):
        if not running or self.config.max_preemptions_per_round == 0:
            return []
        movers = self.restorable(running, now)
        if not waiting and not movers:
            return []
        running_scores = {job.job_id: nw_sens(job.priority_inputs(now)) for job in running}
        by_score = sorted(running, key=lambda j: (-running_scores[j.job_id], j.spec.arrival_time, j.job_id))

        def cap_for(job: JobState) -> Tier:
            if job.is_running:
                return self.topology.best_tier_for(job.spec.gpu_demand)
            return self.acceptable_tier_cap(job, now)

        def candidates_for(job: JobState) -> List[JobState]:
            threshold = nw_sens(job.priority_inputs(now)) * (1.0 + self.config.preemption_margin)
            return [r for r in by_score if running_scores[r.job_id] > threshold]

        preempted = plan_preemptions(
            priority_order(list(waiting) + movers, now), ledger, self.topology,
            cap_for=cap_for,
            candidates_for=candidates_for,
            max_victims=self.config.max_preemptions_per_round,
        )
        if preempted:
            mover_ids = {job.job_id for job in movers}
            restored = [job.job_id for job in preempted if job.job_id in mover_ids]
            logger.debug("Dally preempting %s at t=%.1f (restoring %s)",
                         [job.job_id for job in preempted], now, restored)
        return preempted
