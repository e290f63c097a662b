"""
Metrics aggregation, output files and cross-policy comparison
"""
from .metrics import RunTimeline, distribution, finalize, nearest_rank
from .writer import OUTPUT_FILES, write_outputs
from .comparison import compare_policies, format_comparison, improvement_percent, load_runs

__all__ = [
    'RunTimeline', 'distribution', 'finalize', 'nearest_rank',
    'OUTPUT_FILES', 'write_outputs',
    'compare_policies', 'format_comparison', 'improvement_percent', 'load_runs',
]
