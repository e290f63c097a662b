"""
Per-iteration communication latency of a job under a concrete placement.

Three interchangeable models are available; exactly one is active per run:

- ``profile_table``: measured fractions of compute time per tier (default)
- ``analytical_allreduce``: staged ring all-reduce over the placement's links
- ``static_penalty``: one fixed fraction per tier, identical for every model
"""

import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from .exceptions import ConfigError, MissingProfileError, ValidationError
from .topology import ClusterTopology, Placement, Tier, derive_tier

logger = logging.getLogger(__name__)

DEFAULT_PROFILES_PATH = Path(__file__).resolve().parent.parent / "data" / "model_profiles.csv"
PROFILE_HEADER = ["model", "machine_frac", "rack_frac", "network_frac", "gradient_bytes", "skew"]


class SkewClass(Enum):
    HIGH = "high"
    LOW = "low"


def normalize_model_name(name: str) -> str:
    return name.strip().lower()


@dataclass(frozen=True)
class ModelProfile:
    model_name: str
    comm_fraction: Dict[Tier, float]
    skew_class: SkewClass
    gradient_bytes: Optional[float] = None

    def __post_init__(self):
        for tier in Tier:
            value = self.comm_fraction.get(tier)
            if value is None or not value >= 0 or math.isinf(value):
                raise ValidationError(
                    f"Profile '{self.model_name}' needs a finite {tier.label} fraction >= 0"
                )
        if self.gradient_bytes is not None and not self.gradient_bytes > 0:
            raise ValidationError(f"Profile '{self.model_name}' gradient_bytes must be > 0")

    @property
    def is_high_skew(self) -> bool:
        return self.skew_class is SkewClass.HIGH


class ProfileCatalog:
    """Model profiles keyed by normalized model name"""

    def __init__(self, profiles: Iterable[ModelProfile] = ()):
        self._profiles: Dict[str, ModelProfile] = {}
        for profile in profiles:
            self.add(profile)

    def add(self, profile: ModelProfile) -> None:
        self._profiles[normalize_model_name(profile.model_name)] = profile

    def get(self, model_name: str) -> ModelProfile:
        try:
            return self._profiles[normalize_model_name(model_name)]
        except KeyError:
            raise MissingProfileError(model_name)

    def __contains__(self, model_name: str) -> bool:
        return normalize_model_name(model_name) in self._profiles

    def __len__(self) -> int:
        return len(self._profiles)

    @property
    def model_names(self) -> List[str]:
        return list(self._profiles)

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "ProfileCatalog":
        path = Path(path) if path else DEFAULT_PROFILES_PATH
        if not path.exists():
            raise FileNotFoundError(f"Profile file not found: {path}")
        catalog = cls()
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != PROFILE_HEADER:
                raise ValidationError(
                    f"{path}: expected header {','.join(PROFILE_HEADER)}, got {header}"
                )
            for line_number, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                catalog.add(_parse_profile_row(row, line_number, path))
        logger.debug("Loaded %d model profiles from %s", len(catalog), path)
        return catalog


def _parse_profile_row(row: List[str], line_number: int, path: Path) -> ModelProfile:
    if len(row) != len(PROFILE_HEADER):
        raise ValidationError(f"{path}:{line_number}: expected {len(PROFILE_HEADER)} fields")
    name, machine, rack, network, grad, skew = (cell.strip() for cell in row)
    try:
        fractions = {
            Tier.MACHINE: float(machine),
            Tier.RACK: float(rack),
            Tier.NETWORK: float(network),
        }
        gradient_bytes = float(grad) if grad else None
        skew_class = SkewClass(skew.lower())
    except ValueError as e:
        raise ValidationError(f"{path}:{line_number}: {e}")
    return ModelProfile(
        model_name=name,
        comm_fraction=fractions,
        skew_class=skew_class,
        gradient_bytes=gradient_bytes,
    )


def _stage_cost(n: int, size_bytes: float, link) -> float:
    if n <= 1:
        return 0.0
    if not link.bandwidth_gbps > 0:
        raise ConfigError("Link bandwidth must be > 0")
    return 2 * (n - 1) * link.latency_seconds + 2 * ((n - 1) / n) * size_bytes / link.bytes_per_second


def hierarchical_allreduce_cost(gradient_bytes: float, placement: Placement,
                                topo: ClusterTopology) -> float:
    """
    Time of a three-stage ring all-reduce: inside machines, across machines
    of each rack, then across racks. Each stage is sized by its widest group.
    """
    if not gradient_bytes > 0:
        raise ValidationError(f"gradient_bytes must be > 0, got {gradient_bytes}")
    placement.validate_against(topo)
    n_machine = max(count for _, _, count in placement.slots)
    n_rack = max(placement.machines_per_rack().values())
    n_network = len(placement.racks)
    return (
        _stage_cost(n_machine, gradient_bytes, topo.machine_link)
        + _stage_cost(n_rack, gradient_bytes, topo.rack_link)
        + _stage_cost(n_network, gradient_bytes, topo.network_link)
    )


class LatencyModel:
    variant = "base"

    def comm_latency(self, profile: ModelProfile, placement: Placement,
                     topo: ClusterTopology, compute_time_per_iter: float) -> float:
        raise NotImplementedError

    def _check_compute(self, compute_time_per_iter: float) -> None:
        if not compute_time_per_iter > 0:
            raise ValidationError(f"compute_time_per_iter must be > 0, got {compute_time_per_iter}")


class ProfileTableModel(LatencyModel):
    variant = "profile_table"

    def comm_latency(self, profile, placement, topo, compute_time_per_iter):
        self._check_compute(compute_time_per_iter)
        return compute_time_per_iter * profile.comm_fraction[derive_tier(placement, topo)]


class AnalyticalAllReduceModel(LatencyModel):
    variant = "analytical_allreduce"

    def comm_latency(self, profile, placement, topo, compute_time_per_iter):
        self._check_compute(compute_time_per_iter)
        if profile.gradient_bytes is None:
            raise MissingProfileError(profile.model_name, "no gradient_bytes for analytical latency")
        return hierarchical_allreduce_cost(profile.gradient_bytes, placement, topo)


class StaticPenaltyModel(LatencyModel):
    """Fixed slowdown per tier regardless of the model being trained"""
    variant = "static_penalty"

    def __init__(self, penalties: Dict[Tier, float]):
        for tier in Tier:
            if penalties.get(tier, -1) < 0:
                raise ConfigError(f"latency.static_penalty.{tier.label} must be >= 0")
        self.penalties = dict(penalties)

    def comm_latency(self, profile, placement, topo, compute_time_per_iter):
        self._check_compute(compute_time_per_iter)
        return compute_time_per_iter * self.penalties[derive_tier(placement, topo)]


LATENCY_VARIANTS = ("profile_table", "analytical_allreduce", "static_penalty")


def build_latency_model(section: Dict) -> LatencyModel:
    variant = section.get("variant", "profile_table")
    if variant == "profile_table":
        return ProfileTableModel()
    if variant == "analytical_allreduce":
        return AnalyticalAllReduceModel()
    if variant == "static_penalty":
        raw = section.get("static_penalty") or {}
        return StaticPenaltyModel({tier: float(raw.get(tier.label, 0.0)) for tier in Tier})
    raise ConfigError(f"Unknown latency.variant {variant!r}; expected one of {LATENCY_VARIANTS}")
