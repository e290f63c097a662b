"""
Cross-policy comparison of a sweep.

Improvements are stated as (baseline - target) / baseline * 100, so a
positive number means the target policy is lower (better) on that metric.
"""

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from database.models import RunRecord
from database.results_db import ResultsDatabase

HEADLINE_METRICS = ("makespan", "mean_jct", "p99_jct", "mean_queueing_delay", "mean_comm_latency")
RESULTS_DB_NAME = "results.db"


@dataclass
class PolicyAverages:
    policy: str
    num_racks: int
    seeds: int
    metrics: Dict[str, float]


@dataclass
class Improvement:
    num_racks: int
    baseline: str
    target: str
    metrics: Dict[str, float]


def improvement_percent(baseline: float, target: float) -> float:
    if baseline == 0:
        return 0.0
    return (baseline - target) / baseline * 100.0


def average_by_policy(runs: Sequence[RunRecord]) -> List[PolicyAverages]:
    grouped: Dict[tuple, List[RunRecord]] = defaultdict(list)
    for run in runs:
        grouped[(run.num_racks, run.policy)].append(run)
    return [
        PolicyAverages(
            policy=policy,
            num_racks=racks,
            seeds=len(group),
            metrics={m: float(np.mean([getattr(r, m) for r in group])) for m in HEADLINE_METRICS},
        )
        for (racks, policy), group in sorted(grouped.items())
    ]


def compare_policies(runs: Sequence[RunRecord], target: str = "dally") -> List[Improvement]:
    averages = average_by_policy(runs)
    by_racks: Dict[int, Dict[str, PolicyAverages]] = defaultdict(dict)
    for avg in averages:
        by_racks[avg.num_racks][avg.policy] = avg

    results = []
    for racks in sorted(by_racks):
        policies = by_racks[racks]
        if target not in policies:
            continue
        chosen = policies[target]
        for name in sorted(policies):
            if name == target:
                continue
            baseline = policies[name]
            results.append(Improvement(
                num_racks=racks,
                baseline=name,
                target=target,
                metrics={m: improvement_percent(baseline.metrics[m], chosen.metrics[m])
                         for m in HEADLINE_METRICS},
            ))
    return results


def load_runs(results_dir: Union[str, Path]) -> List[RunRecord]:
    db_path = Path(results_dir) / RESULTS_DB_NAME
    if not db_path.is_file():
        raise FileNotFoundError(f"No {RESULTS_DB_NAME} in {results_dir}")
    with ResultsDatabase(str(db_path)) as db:
        return db.list_runs()


def format_comparison(improvements: Sequence[Improvement]) -> str:
    if not improvements:
        return "Nothing to compare"
    header = f"{'racks':>5}  {'baseline':<24}" + "".join(f"{m:>20}" for m in HEADLINE_METRICS)
    lines = [header, "-" * len(header)]
    for item in improvements:
        lines.append(f"{item.num_racks:>5}  {item.baseline:<24}"
                     + "".join(f"{item.metrics[m]:>19.1f}%" for m in HEADLINE_METRICS))
    return "\n".join(lines)
