"""
Run metrics: makespan, JCT, queueing delay and exposed communication time.

Percentiles use the nearest-rank convention on the sorted sample, i.e. the
p-th percentile of n values is sorted[ceil(p/100 * n) - 1].
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from core.exceptions import IncompleteRunError
from core.job import JobState
from core.topology import ClusterTopology, Tier
from database.models import DistributionStats, JobRecord, MetricsReport

DEFAULT_MACHINE_HOUR_USD = 32.77


@dataclass
class RunTimeline:
    """Time series the engine records while it runs"""
    start_time: float = 0.0
    utilization: List[Tuple[float, float]] = field(default_factory=list)
    jobs_remaining: List[Tuple[float, int]] = field(default_factory=list)
    tier_segments: Counter = field(default_factory=Counter)

    def begin(self, start_time: float) -> None:
        self.start_time = start_time
        self.utilization = [(start_time, 0.0)]
        self.jobs_remaining = []

    def record_busy(self, now: float, fraction: float) -> None:
        """Append a step of the busy-GPU fraction; consecutive equal values collapse"""
        last_time, last_value = self.utilization[-1]
        if fraction == last_value:
            return
        if now != last_time:
            self.utilization.append((now, last_value))
        self.utilization.append((now, fraction))

    def record_remaining(self, now: float, count: int) -> None:
        self.jobs_remaining.append((now, count))

    def record_segment(self, tier: Tier) -> None:
        self.tier_segments[tier.label] += 1


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    if not sorted_values:
        raise ValueError("nearest_rank of an empty sample")
    rank = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return float(sorted_values[rank - 1])


def distribution(values: Sequence[float]) -> DistributionStats:
    if not values:
        return DistributionStats(0.0, 0.0, 0.0, 0.0)
    ordered = sorted(values)
    return DistributionStats(
        mean=float(np.mean(ordered)),
        median=nearest_rank(ordered, 50),
        p95=nearest_rank(ordered, 95),
        p99=nearest_rank(ordered, 99),
    )


def integrate_utilization(series: Sequence[Tuple[float, float]]) -> float:
    """Trapezoid area under the busy fraction curve, in seconds"""
    if len(series) < 2:
        return 0.0
    times = np.array([t for t, _ in series], dtype=float)
    values = np.array([v for _, v in series], dtype=float)
    return float(np.sum(np.diff(times) * (values[1:] + values[:-1]) / 2.0))


def job_record(job: JobState) -> JobRecord:
    spec = job.spec
    return JobRecord(
        job_id=spec.job_id,
        model_name=spec.model_name,
        gpu_demand=spec.gpu_demand,
        iterations=job.iterations_completed,
        arrival=spec.arrival_time,
        first_start=job.first_start,
        completion=job.completion_time,
        jct=job.completion_time - spec.arrival_time,
        queueing_delay=job.wait_time_accum,
        run_time=job.run_time_accum,
        comm_latency_total=job.comm_time_accum,
        num_preemptions=job.num_preemptions,
        num_migrations=job.num_migrations,
        final_tier_history=[(t, tier.label) for t, tier in job.tier_history],
    )


def finalize(job_states: Sequence[JobState], timeline: RunTimeline, topo: ClusterTopology,
             policy_name: str = "", seed: int = 0,
             machine_hour_usd: float = DEFAULT_MACHINE_HOUR_USD) -> MetricsReport:
    unfinished = [job.job_id for job in job_states if not job.is_done]
    if unfinished:
        raise IncompleteRunError(f"{len(unfinished)} job(s) not finished: {', '.join(sorted(unfinished)[:20])}")
    if not job_states:
        raise IncompleteRunError("Run has no jobs")

    records = [job_record(job) for job in job_states]
    first_arrival = min(r.arrival for r in records)
    last_completion = max(r.completion for r in records)
    makespan = last_completion - first_arrival

    utilization = list(timeline.utilization)
    if utilization and last_completion > utilization[-1][0]:
        utilization.append((last_completion, utilization[-1][1]))
    mean_utilization = integrate_utilization(utilization) / makespan if makespan > 0 else 0.0

    return MetricsReport(
        makespan=makespan,
        jct_stats=distribution([r.jct for r in records]),
        queueing_stats=distribution([r.queueing_delay for r in records]),
        comm_latency_stats=distribution([r.comm_latency_total for r in records]),
        utilization_series=utilization,
        jobs_remaining_series=list(timeline.jobs_remaining),
        jobs=records,
        policy=policy_name,
        num_racks=topo.num_racks,
        seed=seed,
        total_gpus=topo.total_gpus,
        mean_utilization=mean_utilization,
        cost_estimate_usd=makespan / 3600.0 * topo.num_machines * machine_hour_usd,
        total_preemptions=sum(r.num_preemptions for r in records),
        total_migrations=sum(r.num_migrations for r in records),
        tier_segments={tier.label: timeline.tier_segments.get(tier.label, 0) for tier in Tier},
    )
