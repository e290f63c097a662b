from dataclasses import dataclass, field, asdict
from typing import List, Dict, Optional, Any, Tuple
import time


@dataclass
class DistributionStats:
    mean: float
    median: float
    p95: float
    p99: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class JobRecord:
    job_id: str
    model_name: str
    gpu_demand: int
    iterations: int
    arrival: float
    first_start: float
    completion: float
    jct: float
    queueing_delay: float
    run_time: float
    comm_latency_total: float
    num_preemptions: int
    num_migrations: int
    final_tier_history: List[Tuple[float, str]]  # (segment start, tier label)

    @property
    def gpu_time(self) -> float:
        return self.run_time * self.gpu_demand


@dataclass
class MetricsReport:
    makespan: float
    jct_stats: DistributionStats
    queueing_stats: DistributionStats
    comm_latency_stats: DistributionStats
    utilization_series: List[Tuple[float, float]]
    jobs_remaining_series: List[Tuple[float, int]]
    jobs: List[JobRecord]
    policy: str = ""
    num_racks: int = 0
    seed: int = 0
    total_gpus: int = 0
    mean_utilization: float = 0.0
    cost_estimate_usd: float = 0.0
    total_preemptions: int = 0
    total_migrations: int = 0
    tier_segments: Dict[str, int] = field(default_factory=dict)
    percentile_method: str = "nearest-rank"

    def summary(self) -> Dict[str, Any]:
        """Scalar view used for summary.json; series and per-job rows go to CSV"""
        return {
            'policy': self.policy,
            'num_racks': self.num_racks,
            'seed': self.seed,
            'total_gpus': self.total_gpus,
            'num_jobs': len(self.jobs),
            'makespan': self.makespan,
            'jct_stats': self.jct_stats.to_dict(),
            'queueing_stats': self.queueing_stats.to_dict(),
            'comm_latency_stats': self.comm_latency_stats.to_dict(),
            'percentile_method': self.percentile_method,
            'mean_utilization': self.mean_utilization,
            'cost_estimate_usd': self.cost_estimate_usd,
            'total_preemptions': self.total_preemptions,
            'total_migrations': self.total_migrations,
            'tier_segments': dict(self.tier_segments),
        }


@dataclass
class RunRecord:
    run_name: str
    policy: str
    num_racks: int
    seed: int
    num_jobs: int
    makespan: float
    mean_jct: float
    p99_jct: float
    mean_queueing_delay: float
    mean_comm_latency: float
    mean_utilization: float
    output_dir: str
    created_at: float = field(default_factory=time.time)
    run_id: Optional[int] = None

    @classmethod
    def from_report(cls, run_name: str, report: MetricsReport, output_dir: str) -> "RunRecord":
        return cls(
            run_name=run_name,
            policy=report.policy,
            num_racks=report.num_racks,
            seed=report.seed,
            num_jobs=len(report.jobs),
            makespan=report.makespan,
            mean_jct=report.jct_stats.mean,
            p99_jct=report.jct_stats.p99,
            mean_queueing_delay=report.queueing_stats.mean,
            mean_comm_latency=report.comm_latency_stats.mean,
            mean_utilization=report.mean_utilization,
            output_dir=output_dir,
        )
