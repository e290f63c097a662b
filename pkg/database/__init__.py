"""
Result records and the per-sweep sqlite run index
"""
from .models import DistributionStats, JobRecord, MetricsReport, RunRecord
from .results_db import ResultsDatabase

__all__ = [
    'ResultsDatabase',
    'DistributionStats', 'JobRecord', 'MetricsReport', 'RunRecord',
]
