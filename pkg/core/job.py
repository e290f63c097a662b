"""
Job description and mutable per-job simulation state
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from .exceptions import ValidationError
from .topology import Placement, Tier

# tolerance when counting whole iterations inside a segment
ITERATION_EPSILON = 1e-9


@dataclass(frozen=True)
class JobSpec:
    job_id: str
    arrival_time: float
    model_name: str
    gpu_demand: int
    total_expected_iterations: int
    compute_time_per_iter: float

    def __post_init__(self):
        if not self.job_id:
            raise ValidationError("job_id must not be empty")
        if not self.arrival_time >= 0:
            raise ValidationError(f"Job {self.job_id}: arrival_time must be >= 0")
        if not isinstance(self.gpu_demand, int) or self.gpu_demand < 1:
            raise ValidationError(f"Job {self.job_id}: gpu_demand must be an integer >= 1")
        if not isinstance(self.total_expected_iterations, int) or self.total_expected_iterations < 1:
            raise ValidationError(f"Job {self.job_id}: iterations must be an integer >= 1")
        if not self.compute_time_per_iter > 0:
            raise ValidationError(f"Job {self.job_id}: compute_time_per_iter must be > 0")

    @property
    def ideal_run_time(self) -> float:
        """Compute-only running time, no communication"""
        return self.total_expected_iterations * self.compute_time_per_iter


class JobPhase(Enum):
    WAITING = "waiting"
    RUNNING = "running"
    DONE = "done"


@dataclass
class PriorityInputs:
    iterations_completed: int
    total_expected_iterations: int
    run_time: float
    ideal_run_time: float


@dataclass
class JobState:
    spec: JobSpec
    phase: JobPhase = JobPhase.WAITING
    iterations_completed: int = 0
    run_time_accum: float = 0.0
    wait_time_accum: float = 0.0
    comm_time_accum: float = 0.0
    placement: Optional[Placement] = None
    segment_start: Optional[float] = None
    effective_start: Optional[float] = None
    last_assignment_ref: float = 0.0
    per_iter_time_current: Optional[float] = None
    comm_per_iter_current: Optional[float] = None
    completion_due: Optional[float] = None
    placement_epoch: int = 0
    wait_since: Optional[float] = None
    first_start: Optional[float] = None
    completion_time: Optional[float] = None
    num_preemptions: int = 0
    num_migrations: int = 0
    tier_history: List[Tuple[float, Tier]] = field(default_factory=list)

    @classmethod
    def arrive(cls, spec: JobSpec, now: float) -> "JobState":
        return cls(spec=spec, last_assignment_ref=now, wait_since=now)

    @property
    def job_id(self) -> str:
        return self.spec.job_id

    @property
    def is_running(self) -> bool:
        return self.phase is JobPhase.RUNNING

    @property
    def is_waiting(self) -> bool:
        return self.phase is JobPhase.WAITING

    @property
    def is_done(self) -> bool:
        return self.phase is JobPhase.DONE

    @property
    def remaining_iterations(self) -> int:
        return self.spec.total_expected_iterations - self.iterations_completed

    @property
    def current_tier(self) -> Optional[Tier]:
        return self.placement.tier if self.placement is not None else None

    def segment_progress(self, now: float) -> int:
        """Whole iterations finished in the running segment by `now`"""
        if not self.is_running or now <= self.effective_start:
            return 0
        done = int(math.floor((now - self.effective_start) / self.per_iter_time_current + ITERATION_EPSILON))
        limit = self.remaining_iterations
        if self.completion_due is not None and now < self.completion_due:
            limit -= 1
        return max(0, min(done, limit))

    def live_iterations(self, now: float) -> int:
        return self.iterations_completed + self.segment_progress(now)

    def live_run_time(self, now: float) -> float:
        if self.is_running:
            return self.run_time_accum + (now - self.segment_start)
        return self.run_time_accum

    def attained_service(self, now: float) -> float:
        """GPU-seconds of service received so far"""
        return self.live_run_time(now) * self.spec.gpu_demand

    def starvation(self, now: float) -> float:
        return now - self.last_assignment_ref

    def priority_inputs(self, now: float) -> PriorityInputs:
        return PriorityInputs(
            iterations_completed=self.live_iterations(now),
            total_expected_iterations=self.spec.total_expected_iterations,
            run_time=self.live_run_time(now),
            ideal_run_time=self.spec.ideal_run_time,
        )

    def accounted_time(self, now: float) -> float:
        """wait + run + time spent in the current wait interval"""
        pending_wait = now - self.wait_since if self.is_waiting else 0.0
        return self.wait_time_accum + self.live_run_time(now) + pending_wait
