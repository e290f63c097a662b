"""
Discrete-event simulation core.

Time only moves forward through a heap of events keyed by
(time, kind rank, seq). At equal timestamps arrivals are handled first so a
job arriving on a round boundary is eligible that round; completions come
last. A completion carries the placement epoch it was scheduled under and
is dropped if the job has since been preempted or migrated.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .exceptions import (
    EngineInvariantError,
    HorizonExceededError,
    InfeasibleDemandError,
    ValidationError,
)
from .job import JobPhase, JobSpec, JobState
from .latency import LatencyModel, ProfileCatalog
from .topology import CapacityLedger, ClusterTopology, Placement

logger = logging.getLogger(__name__)

ACCOUNTING_TOLERANCE = 1e-6


class EventKind(IntEnum):
    ARRIVAL = 0
    SCHEDULING_ROUND = 1
    MIGRATION_CHECK = 2
    JOB_COMPLETION = 3


# rounds triggered by a completion run after every completion at that instant
_FOLLOW_UP_RANK = 4


@dataclass(frozen=True)
class SimEvent:
    time: float
    seq: int
    kind: EventKind
    job_id: Optional[str] = None
    epoch: Optional[int] = None
    periodic: bool = True

    @property
    def rank(self) -> int:
        if self.kind is EventKind.SCHEDULING_ROUND and not self.periodic:
            return _FOLLOW_UP_RANK
        return int(self.kind)


@dataclass
class SimConfig:
    round_period: float = 360.0
    checkpoint_restore_overhead: float = 0.0
    rng_seed: int = 0
    horizon_guard: float = 1e9
    reschedule_on_completion: bool = True
    audit: bool = False

    def __post_init__(self):
        if not self.round_period > 0:
            raise ValidationError("engine.round_period_s must be > 0")
        if self.checkpoint_restore_overhead < 0:
            raise ValidationError("engine.checkpoint_restore_overhead_s must be >= 0")
        if not self.horizon_guard > 0:
            raise ValidationError("engine.horizon_s must be > 0")

    @classmethod
    def from_config(cls, section: Dict, seed: int = 0) -> "SimConfig":
        return cls(
            round_period=float(section.get("round_period_s", 360.0)),
            checkpoint_restore_overhead=float(section.get("checkpoint_restore_overhead_s", 0.0)),
            rng_seed=seed,
            horizon_guard=float(section.get("horizon_s", 1e9)),
            reschedule_on_completion=bool(section.get("reschedule_on_completion", True)),
            audit=bool(section.get("audit", False)),
        )


Observer = Callable[["Simulator", SimEvent], None]


class Simulator:
    """One single-threaded simulation run over a fixed job list"""

    def __init__(self, jobs: Sequence[JobSpec], topo: ClusterTopology, policy,
                 latency_model: LatencyModel, catalog: ProfileCatalog,
                 config: Optional[SimConfig] = None, observer: Optional[Observer] = None):
        # reporting and scheduler both import core; keep these imports local
        from reporting.metrics import RunTimeline

        self.topo = topo
        self.policy = policy
        self.latency_model = latency_model
        self.catalog = catalog
        self.config = config or SimConfig()
        self.observer = observer

        self.specs: List[JobSpec] = list(jobs)
        self._validate_jobs()
        self._spec_index = {spec.job_id: spec for spec in self.specs}

        self.ledger = CapacityLedger(topo)
        self.states: Dict[str, JobState] = {}
        self.active: List[JobState] = []
        self.now = 0.0
        self.timeline = RunTimeline()
        self.events_processed = 0
        self._queue: List[Tuple[float, int, int, SimEvent]] = []
        self._seq = itertools.count()
        self._follow_up_at: Optional[float] = None
        self._done_count = 0

        policy.bind(topo, catalog)

    def _validate_jobs(self) -> None:
        if not self.specs:
            raise ValidationError("Workload has no jobs")
        seen = set()
        for spec in self.specs:
            if spec.job_id in seen:
                raise ValidationError(f"Duplicate job_id {spec.job_id!r}")
            seen.add(spec.job_id)
            if spec.gpu_demand > self.topo.total_gpus:
                raise InfeasibleDemandError(
                    f"Job {spec.job_id} demands {spec.gpu_demand} GPUs; cluster has {self.topo.total_gpus}"
                )
            self.catalog.get(spec.model_name)

    # event queue

    def _push(self, time: float, kind: EventKind, job_id: Optional[str] = None,
              epoch: Optional[int] = None, periodic: bool = True) -> SimEvent:
        event = SimEvent(time=time, seq=next(self._seq), kind=kind,
                         job_id=job_id, epoch=epoch, periodic=periodic)
        heapq.heappush(self._queue, (event.time, event.rank, event.seq, event))
        return event

    def _pop(self) -> SimEvent:
        return heapq.heappop(self._queue)[3]

    @property
    def all_done(self) -> bool:
        return self._done_count == len(self.specs)

    @property
    def running(self) -> List[JobState]:
        return [job for job in self.active if job.is_running]

    @property
    def waiting(self) -> List[JobState]:
        return [job for job in self.active if job.is_waiting]

    def _preemptable(self) -> List[JobState]:
        # a job whose completion is due now has already finished its work
        return [job for job in self.active if job.is_running and job.completion_due > self.now]

    def _record_busy(self) -> None:
        self.timeline.record_busy(self.now, self.ledger.allocated / self.topo.total_gpus)

    # segment lifecycle

    def start_segment(self, job: JobState, placement: Placement, now: float) -> JobState:
        if not job.is_waiting:
            raise EngineInvariantError(f"start_segment on {job.job_id} in phase {job.phase.value}")
        if placement.gpu_count != job.spec.gpu_demand:
            raise EngineInvariantError(
                f"Job {job.job_id} demands {job.spec.gpu_demand} GPUs, placement has {placement.gpu_count}"
            )
        try:
            placement.validate_against(self.topo)
        except ValidationError as e:
            raise EngineInvariantError(f"Job {job.job_id}: bad placement {placement.describe()}: {e}")
        self.ledger.allocate(placement)

        spec = job.spec
        profile = self.catalog.get(spec.model_name)
        comm = self.latency_model.comm_latency(profile, placement, self.topo, spec.compute_time_per_iter)
        per_iter = spec.compute_time_per_iter + comm

        job.wait_time_accum += now - job.wait_since
        job.wait_since = None
        job.phase = JobPhase.RUNNING
        job.placement = placement
        job.segment_start = now
        job.effective_start = now + self.config.checkpoint_restore_overhead
        job.per_iter_time_current = per_iter
        job.comm_per_iter_current = comm
        job.completion_due = job.effective_start + job.remaining_iterations * per_iter
        job.placement_epoch += 1
        if job.first_start is None:
            job.first_start = now
        tier = placement.tier
        job.tier_history.append((now, tier))
        self.timeline.record_segment(tier)
        self._record_busy()

        self._push(job.completion_due, EventKind.JOB_COMPLETION, job.job_id, job.placement_epoch)
        self.policy.on_job_started(job, now)
        logger.debug("t=%.1f start %s on %s (%s) per-iter %.6g s, due %.1f", now, job.job_id,
                     placement.describe(), tier.label, per_iter, job.completion_due)
        return job

    def _end_segment(self, job: JobState, now: float, finished: bool = False) -> int:
        """Bank progress of the running segment and free its GPUs"""
        progress = job.remaining_iterations if finished else job.segment_progress(now)
        job.iterations_completed += progress
        job.comm_time_accum += progress * job.comm_per_iter_current
        job.run_time_accum += now - job.segment_start
        self.ledger.release(job.placement)
        job.placement = None
        job.segment_start = None
        job.effective_start = None
        job.per_iter_time_current = None
        job.comm_per_iter_current = None
        job.completion_due = None
        job.placement_epoch += 1
        return progress

    def preempt(self, job: JobState, now: float) -> JobState:
        if not job.is_running:
            raise EngineInvariantError(f"preempt on {job.job_id} in phase {job.phase.value}")
        progress = self._end_segment(job, now)
        job.phase = JobPhase.WAITING
        job.last_assignment_ref = now
        job.wait_since = now
        job.num_preemptions += 1
        self._record_busy()
        logger.debug("t=%.1f preempt %s after %d iterations (%d/%d)", now, job.job_id, progress,
                     job.iterations_completed, job.spec.total_expected_iterations)
        return job

    def migrate(self, job: JobState, target: Placement, now: float) -> JobState:
        if not job.is_running:
            raise EngineInvariantError(f"migrate on {job.job_id} in phase {job.phase.value}")
        source = job.placement
        self._end_segment(job, now)
        job.phase = JobPhase.WAITING
        job.last_assignment_ref = now
        job.wait_since = now
        job.num_migrations += 1
        self.start_segment(job, target, now)
        logger.debug("t=%.1f migrate %s %s -> %s", now, job.job_id, source.tier.label, target.tier.label)
        return job

    def complete(self, job: JobState, now: float) -> JobState:
        if now < job.completion_due:
            raise EngineInvariantError(f"Job {job.job_id} completing at {now} before due {job.completion_due}")
        self._end_segment(job, now, finished=True)
        if job.iterations_completed != job.spec.total_expected_iterations:
            raise EngineInvariantError(
                f"Job {job.job_id} completed with {job.iterations_completed}/"
                f"{job.spec.total_expected_iterations} iterations"
            )
        job.phase = JobPhase.DONE
        job.completion_time = now
        self.active.remove(job)
        self._done_count += 1
        self._record_busy()
        self.timeline.record_remaining(now, len(self.active))
        logger.debug("t=%.1f complete %s, jct %.1f", now, job.job_id, now - job.spec.arrival_time)
        return job

    # rounds

    def scheduling_round(self, now: float) -> Tuple[List[JobState], List[JobState]]:
        """Preempt, then offer resources to waiting jobs in policy order"""
        from scheduler.base import ResourceOffer

        victims = self.policy.select_preemption_victims(self._preemptable(), self.waiting, self.ledger, now)
        for victim in victims:
            self.preempt(victim, now)

        started: List[JobState] = []
        for job in self.policy.priority_order(self.waiting, now):
            offer = ResourceOffer.build(job.spec.gpu_demand, self.ledger, self.topo)
            if offer.is_empty:
                continue
            decision = self.policy.on_offer(job, offer, now)
            if decision.accepted:
                self.start_segment(job, offer.placement_for(decision), now)
                started.append(job)
        if started or victims:
            logger.debug("t=%.1f round: %d started, %d preempted, %d waiting", now,
                         len(started), len(victims), len(self.waiting))
        return started, victims

    def migration_check(self, now: float) -> List[JobState]:
        moves = self.policy.migrations(self._preemptable(), self.ledger, now)
        for job, target in moves:
            self.migrate(job, target, now)
        return [job for job, _ in moves]

    # audit

    def audit(self) -> None:
        rebuilt = CapacityLedger(self.topo)
        for job in self.running:
            if job.placement.gpu_count != job.spec.gpu_demand:
                raise EngineInvariantError(f"Job {job.job_id} runs on {job.placement.gpu_count} GPUs")
            rebuilt.allocate(job.placement)
        if rebuilt != self.ledger:
            raise EngineInvariantError(f"Ledger {self.ledger.snapshot()} != placements {rebuilt.snapshot()}")
        for job in self.states.values():
            if job.iterations_completed > job.spec.total_expected_iterations:
                raise EngineInvariantError(f"Job {job.job_id} overran its iterations")
            if job.is_done != (job.iterations_completed == job.spec.total_expected_iterations):
                raise EngineInvariantError(f"Job {job.job_id} done flag disagrees with iterations")
            if job.is_running != (job.placement is not None) or job.is_running != (job.segment_start is not None):
                raise EngineInvariantError(f"Job {job.job_id} phase disagrees with placement")
            end = job.completion_time if job.is_done else self.now
            expected = end - job.spec.arrival_time
            if abs(job.accounted_time(end) - expected) > ACCOUNTING_TOLERANCE * max(1.0, abs(expected)):
                raise EngineInvariantError(
                    f"Job {job.job_id} accounts {job.accounted_time(end):.6f} s of {expected:.6f} s"
                )

    # main loop

    def _handle(self, event: SimEvent) -> None:
        kind = event.kind
        if kind is EventKind.ARRIVAL:
            spec = self._spec_index[event.job_id]
            job = JobState.arrive(spec, self.now)
            self.states[spec.job_id] = job
            self.active.append(job)
            self.timeline.record_remaining(self.now, len(self.active))
        elif kind is EventKind.SCHEDULING_ROUND:
            if not event.periodic:
                self._follow_up_at = None
            self.scheduling_round(self.now)
            if event.periodic and not self.all_done:
                self._push(self.now + self.config.round_period, EventKind.SCHEDULING_ROUND)
        elif kind is EventKind.MIGRATION_CHECK:
            self.migration_check(self.now)
            if not self.all_done:
                self._push(self.now + self.policy.migration_period, EventKind.MIGRATION_CHECK)
        elif kind is EventKind.JOB_COMPLETION:
            job = self.states.get(event.job_id)
            if job is None or not job.is_running or job.placement_epoch != event.epoch:
                return
            self.complete(job, self.now)
            if self.config.reschedule_on_completion and not self.all_done and self._follow_up_at != self.now:
                self._follow_up_at = self.now
                self._push(self.now, EventKind.SCHEDULING_ROUND, periodic=False)

    def run(self, machine_hour_usd: Optional[float] = None):
        """Process events until every job is done; returns a MetricsReport"""
        from reporting.metrics import DEFAULT_MACHINE_HOUR_USD, finalize

        if machine_hour_usd is None:
            machine_hour_usd = DEFAULT_MACHINE_HOUR_USD
        first_arrival = min(spec.arrival_time for spec in self.specs)
        self.now = first_arrival
        self.timeline.begin(first_arrival)

        for spec in sorted(self.specs, key=lambda s: s.arrival_time):
            self._push(spec.arrival_time, EventKind.ARRIVAL, spec.job_id)
        period = self.config.round_period
        first_round = math.ceil(first_arrival / period) * period
        self._push(first_round, EventKind.SCHEDULING_ROUND)
        if self.policy.migration_period:
            self._push(first_round + self.policy.migration_period, EventKind.MIGRATION_CHECK)

        logger.info("Simulating %d jobs on %d GPUs (%d racks) with policy %s",
                    len(self.specs), self.topo.total_gpus, self.topo.num_racks, self.policy.name)

        while self._queue and not self.all_done:
            event = self._pop()
            if event.time > self.config.horizon_guard:
                stuck = [spec.job_id for spec in self.specs
                         if spec.job_id not in self.states or not self.states[spec.job_id].is_done]
                raise HorizonExceededError(self.config.horizon_guard, stuck)
            self.now = event.time
            self._handle(event)
            self.events_processed += 1
            if self.config.audit:
                self.audit()
            if self.observer is not None:
                self.observer(self, event)

        if not self.all_done:
            raise EngineInvariantError("Event queue drained with unfinished jobs")

        report = finalize([self.states[spec.job_id] for spec in self.specs], self.timeline, self.topo,
                          policy_name=self.policy.name, seed=self.config.rng_seed,
                          machine_hour_usd=machine_hour_usd)
        logger.info("Finished %d jobs under %s: makespan %.1f s, mean JCT %.1f s (%d events)",
                    len(self.specs), self.policy.name, report.makespan, report.jct_stats.mean,
                    self.events_processed)
        return report


def run_simulation(workload, topo: ClusterTopology, policy, latency_model: LatencyModel,
                   catalog: ProfileCatalog, config: Optional[SimConfig] = None,
                   observer: Optional[Observer] = None, machine_hour_usd: Optional[float] = None):
    """
    Run one simulation. `workload` is a WorkloadSpec or a plain list of
    JobSpec. The policy instance must be fresh; it keeps per-run state.
    """
    jobs = getattr(workload, "jobs", workload)
    return Simulator(jobs, topo, policy, latency_model, catalog, config, observer).run(machine_hour_usd)
