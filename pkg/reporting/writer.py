"""
Write a MetricsReport to an output directory.

Every float is rendered with 6 significant digits so identical runs produce
byte-identical files.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

from database.models import MetricsReport
from utils.file_utils import OutputDirectory, format_number, round_significant
from .html_report import render_report

logger = logging.getLogger(__name__)

JOBS_HEADER = [
    "job_id", "model", "gpu_demand", "iterations", "arrival", "first_start", "completion",
    "jct", "queueing_delay", "run_time", "comm_latency_total", "num_preemptions",
    "num_migrations", "tier_history",
]

OUTPUT_FILES = ("summary.json", "jobs.csv", "jct_cdf.csv", "utilization.csv",
                "jobs_remaining.csv", "report.html")


def _tier_history(history) -> str:
    return ";".join(f"{format_number(t)}:{tier}" for t, tier in history)


def write_outputs(report: MetricsReport, out_dir: Union[str, Path],
                  effective_config: Optional[Dict] = None) -> Path:
    out = OutputDirectory(out_dir)
    fmt = format_number

    out.write_json("summary.json", round_significant(report.summary()))

    out.write_csv("jobs.csv", JOBS_HEADER, (
        [j.job_id, j.model_name, j.gpu_demand, j.iterations, fmt(j.arrival), fmt(j.first_start),
         fmt(j.completion), fmt(j.jct), fmt(j.queueing_delay), fmt(j.run_time),
         fmt(j.comm_latency_total), j.num_preemptions, j.num_migrations,
         _tier_history(j.final_tier_history)]
        for j in report.jobs
    ))

    jcts = sorted(j.jct for j in report.jobs)
    n = len(jcts)
    out.write_csv("jct_cdf.csv", ["jct", "cumulative_fraction"],
                  ([fmt(jct), fmt((i + 1) / n)] for i, jct in enumerate(jcts)),
                  comments=["percentiles: nearest-rank"])

    out.write_csv("utilization.csv", ["time", "busy_fraction"],
                  ([fmt(t), fmt(v)] for t, v in report.utilization_series))
    out.write_csv("jobs_remaining.csv", ["time", "jobs_remaining"],
                  ([fmt(t), count] for t, count in report.jobs_remaining_series))

    out.write_text("report.html", render_report(report))
    if effective_config is not None:
        out.write_json("effective_config.json", effective_config)

    logger.info("Wrote %s outputs to %s", report.policy or "run", out.base_path)
    return out.base_path
