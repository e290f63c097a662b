"""
Core components for the GPU cluster scheduling simulator
"""
__version__ = "1.0.0"

from .topology import ClusterTopology, CapacityLedger, Placement, Tier, TierLink, find_placement
from .latency import LatencyModel, ModelProfile, ProfileCatalog, build_latency_model
from .job import JobSpec, JobState
from .engine import SimConfig, Simulator, run_simulation

__all__ = [
    'ClusterTopology', 'CapacityLedger', 'Placement', 'Tier', 'TierLink', 'find_placement',
    'LatencyModel', 'ModelProfile', 'ProfileCatalog', 'build_latency_model',
    'JobSpec', 'JobState',
    'SimConfig', 'Simulator', 'run_simulation',
]
