"""
Workload construction: trace files, arrival modes, synthetic traces
"""
from .trace import TRACE_HEADER, ArrivalMode, WorkloadSpec, ideal_run_time, load_trace, write_trace
from .generator import build_workload, gen_trace, generate_jobs, poissonize

__all__ = [
    'TRACE_HEADER', 'ArrivalMode', 'WorkloadSpec', 'ideal_run_time', 'load_trace', 'write_trace',
    'build_workload', 'gen_trace', 'generate_jobs', 'poissonize',
]
