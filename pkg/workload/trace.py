"""
Job trace files.

CSV with header
    job_id,arrival_time_s,model,gpu_demand,iterations,compute_time_per_iter_s
one job per row, in submission order.
"""

import csv
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Union

from core.exceptions import MissingProfileError, TraceParseError, ValidationError
from core.job import JobSpec
from core.latency import ProfileCatalog, normalize_model_name

logger = logging.getLogger(__name__)

TRACE_HEADER = ["job_id", "arrival_time_s", "model", "gpu_demand", "iterations", "compute_time_per_iter_s"]


class ArrivalMode(Enum):
    BATCH = "batch"
    POISSON = "poisson"


@dataclass(frozen=True)
class WorkloadSpec:
    jobs: List[JobSpec]
    arrival_mode: ArrivalMode = ArrivalMode.BATCH
    rate: Optional[float] = None
    seed: int = 0


def ideal_run_time(spec: JobSpec) -> float:
    """Running time with no communication latency at all"""
    return spec.total_expected_iterations * spec.compute_time_per_iter


def _parse_int(raw: str, column: str, line_number: int, path: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise TraceParseError(f"{column} must be an integer, got {raw!r}", line_number, path)


def _parse_float(raw: str, column: str, line_number: int, path: str) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise TraceParseError(f"{column} must be a number, got {raw!r}", line_number, path)


def load_trace(path: Union[str, Path], catalog: Optional[ProfileCatalog] = None) -> List[JobSpec]:
    """
    Parse a trace file. Jobs come back in file order. When a catalog is
    given every model must have a profile.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Trace file not found: {path}")

    jobs: List[JobSpec] = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACE_HEADER:
            raise TraceParseError(f"expected header {','.join(TRACE_HEADER)}", 1, str(path))

        for row in reader:
            line_number = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(TRACE_HEADER):
                raise TraceParseError(f"expected {len(TRACE_HEADER)} columns, got {len(row)}",
                                      line_number, str(path))
            job_id = row[0].strip()
            model = normalize_model_name(row[2])
            try:
                spec = JobSpec(
                    job_id=job_id,
                    arrival_time=_parse_float(row[1], "arrival_time_s", line_number, str(path)),
                    model_name=model,
                    gpu_demand=_parse_int(row[3], "gpu_demand", line_number, str(path)),
                    total_expected_iterations=_parse_int(row[4], "iterations", line_number, str(path)),
                    compute_time_per_iter=_parse_float(row[5], "compute_time_per_iter_s", line_number, str(path)),
                )
            except TraceParseError:
                raise
            except ValidationError as e:
                raise TraceParseError(str(e), line_number, str(path))
            if job_id in seen:
                raise TraceParseError(f"duplicate job_id {job_id!r}", line_number, str(path))
            if catalog is not None and model not in catalog:
                raise MissingProfileError(model, f"referenced at {path}:{line_number} but not in profile file")
            seen.add(job_id)
            jobs.append(spec)

    logger.info("Loaded %d jobs from %s", len(jobs), path)
    return jobs


def write_trace(jobs: Iterable[JobSpec], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for spec in jobs:
            writer.writerow([
                spec.job_id,
                repr(float(spec.arrival_time)),
                spec.model_name,
                spec.gpu_demand,
                spec.total_expected_iterations,
                repr(float(spec.compute_time_per_iter)),
            ])
    return path


def coerce_batch(jobs: Iterable[JobSpec]) -> List[JobSpec]:
    """All arrivals at t=0; non-zero trace arrivals are ignored with a warning"""
    jobs = list(jobs)
    shifted = sum(1 for spec in jobs if spec.arrival_time != 0)
    if shifted:
        logger.warning("Batch arrival mode: ignoring arrival_time_s of %d job(s)", shifted)
    return [replace(spec, arrival_time=0.0) for spec in jobs]
