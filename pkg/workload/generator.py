"""
Synthetic workloads: seeded Poisson arrivals and trace generation.
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import ConfigError, ValidationError
from core.job import JobSpec
from .trace import ArrivalMode, WorkloadSpec, coerce_batch, write_trace

logger = logging.getLogger(__name__)

DEMAND_CHOICES = (1, 2, 4, 8, 16, 32)
COMPUTE_DECIMALS = 6
MIN_COMPUTE_TIME = 10.0 ** -COMPUTE_DECIMALS


def poissonize(jobs: Sequence[JobSpec], rate: float, seed: int = 0) -> List[JobSpec]:
    """
    Assign arrival times from a homogeneous Poisson process: the k-th job
    (in list order) arrives at the sum of k+1 exponential gaps.
    """
    if not rate > 0:
        raise ValidationError(f"Poisson rate must be > 0, got {rate}")
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / rate, size=len(jobs))
    arrivals = np.cumsum(gaps)
    timed = [replace(spec, arrival_time=float(t)) for spec, t in zip(jobs, arrivals)]
    return sorted(timed, key=lambda spec: spec.arrival_time)


def build_workload(jobs: Sequence[JobSpec], arrival: Union[str, ArrivalMode] = ArrivalMode.BATCH,
                   rate: Optional[float] = None, seed: int = 0) -> WorkloadSpec:
    try:
        mode = ArrivalMode(arrival)
    except ValueError:
        raise ConfigError(f"Unknown workload.arrival {arrival!r}; expected batch or poisson")
    if mode is ArrivalMode.BATCH:
        return WorkloadSpec(jobs=coerce_batch(jobs), arrival_mode=mode, seed=seed)
    if rate is None:
        raise ConfigError("workload.rate is required for poisson arrivals")
    return WorkloadSpec(jobs=poissonize(jobs, rate, seed), arrival_mode=mode, rate=rate, seed=seed)


def parse_demand_weights(text: str) -> Dict[int, float]:
    """'8=0.9,16=0.1' -> {8: 0.9, 16: 0.1}"""
    weights: Dict[int, float] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        try:
            demand, weight = item.split("=")
            weights[int(demand)] = float(weight)
        except ValueError:
            raise ConfigError(f"Bad demand weight {item!r}; expected DEMAND=WEIGHT")
    return weights


def parse_range(text: str, cast=float) -> Tuple:
    """'MIN:MAX' -> (MIN, MAX)"""
    try:
        low, high = (cast(part) for part in text.split(":"))
    except ValueError:
        raise ConfigError(f"Bad range {text!r}; expected MIN:MAX")
    if low > high:
        raise ConfigError(f"Range {text!r} has MIN > MAX")
    return low, high


def _demand_probabilities(weights: Optional[Dict[int, float]]) -> np.ndarray:
    if not weights:
        return np.full(len(DEMAND_CHOICES), 1.0 / len(DEMAND_CHOICES))
    unknown = set(weights) - set(DEMAND_CHOICES)
    if unknown:
        raise ConfigError(f"GPU demands must be drawn from {DEMAND_CHOICES}, got {sorted(unknown)}")
    raw = np.array([weights.get(d, 0.0) for d in DEMAND_CHOICES], dtype=float)
    if (raw < 0).any() or raw.sum() <= 0:
        raise ConfigError("Demand weights must be non-negative with a positive sum")
    return raw / raw.sum()


def generate_jobs(n_jobs: int, models: Sequence[str], demand_weights: Optional[Dict[int, float]] = None,
                  iteration_range: Tuple[int, int] = (1000, 10000),
                  compute_range: Tuple[float, float] = (0.1, 1.0), seed: int = 0) -> List[JobSpec]:
    if n_jobs < 1:
        raise ConfigError("n_jobs must be >= 1")
    if not models:
        raise ConfigError("At least one model is required")
    if iteration_range[0] < 1:
        raise ConfigError("Iterations must be >= 1")
    # trace files keep COMPUTE_DECIMALS places; anything smaller would round to 0
    if compute_range[0] < MIN_COMPUTE_TIME:
        raise ConfigError(f"Compute time range must start at >= {MIN_COMPUTE_TIME:g} s, got {compute_range[0]:g}")

    rng = np.random.default_rng(seed)
    model_idx = rng.integers(0, len(models), size=n_jobs)
    demands = rng.choice(DEMAND_CHOICES, size=n_jobs, p=_demand_probabilities(demand_weights))
    iterations = rng.integers(iteration_range[0], iteration_range[1] + 1, size=n_jobs)
    compute = rng.uniform(compute_range[0], compute_range[1], size=n_jobs)

    width = len(str(n_jobs))
    return [
        JobSpec(
            job_id=f"j{i:0{width}d}",
            arrival_time=0.0,
            model_name=models[model_idx[i]],
            gpu_demand=int(demands[i]),
            total_expected_iterations=int(iterations[i]),
            compute_time_per_iter=round(float(compute[i]), COMPUTE_DECIMALS),
        )
        for i in range(n_jobs)
    ]


def gen_trace(n_jobs: int, models: Sequence[str], demand_weights: Optional[Dict[int, float]],
              iteration_range: Tuple[int, int], compute_range: Tuple[float, float],
              seed: int, out_path: Union[str, Path]) -> Path:
    jobs = generate_jobs(n_jobs, models, demand_weights, iteration_range, compute_range, seed)
    path = write_trace(jobs, out_path)
    logger.info("Wrote %d synthetic jobs to %s", len(jobs), path)
    return path
