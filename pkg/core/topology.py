"""
Hierarchical cluster model: GPUs inside machines, machines inside racks,
racks joined by the datacenter network.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Iterable, List, Optional, Tuple

from .exceptions import ConfigError, InfeasibleDemandError, LedgerCorruptionError, ValidationError

logger = logging.getLogger(__name__)


class Tier(IntEnum):
    """Consolidation class of a placement. Lower is more consolidated."""
    MACHINE = 0
    RACK = 1
    NETWORK = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class TierLink:
    bandwidth_gbps: float
    latency_us: float

    def __post_init__(self):
        if not self.bandwidth_gbps > 0:
            raise ConfigError(f"Link bandwidth must be > 0 Gb/s, got {self.bandwidth_gbps}")
        if self.latency_us < 0:
            raise ConfigError(f"Link latency must be >= 0 us, got {self.latency_us}")

    @property
    def bytes_per_second(self) -> float:
        return self.bandwidth_gbps * 1e9 / 8.0

    @property
    def latency_seconds(self) -> float:
        return self.latency_us * 1e-6


# NVSwitch, Quantum and Spectrum class hardware
DEFAULT_MACHINE_LINK = TierLink(bandwidth_gbps=900.0, latency_us=1.0)
DEFAULT_RACK_LINK = TierLink(bandwidth_gbps=400.0, latency_us=5.0)
DEFAULT_NETWORK_LINK = TierLink(bandwidth_gbps=800.0, latency_us=10.0)


@dataclass(frozen=True)
class ClusterTopology:
    gpus_per_machine: int = 8
    machines_per_rack: int = 8
    num_racks: int = 2
    machine_link: TierLink = DEFAULT_MACHINE_LINK
    rack_link: TierLink = DEFAULT_RACK_LINK
    network_link: TierLink = DEFAULT_NETWORK_LINK

    def __post_init__(self):
        for name in ("gpus_per_machine", "machines_per_rack", "num_racks"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"topology.{name} must be an integer >= 1, got {value!r}")

    @property
    def gpus_per_rack(self) -> int:
        return self.gpus_per_machine * self.machines_per_rack

    @property
    def num_machines(self) -> int:
        return self.machines_per_rack * self.num_racks

    @property
    def total_gpus(self) -> int:
        return self.gpus_per_rack * self.num_racks

    def link_for(self, tier: Tier) -> TierLink:
        return {
            Tier.MACHINE: self.machine_link,
            Tier.RACK: self.rack_link,
            Tier.NETWORK: self.network_link,
        }[tier]

    def best_tier_for(self, demand: int) -> Tier:
        """Most consolidated tier a job of this size could ever occupy"""
        if demand <= self.gpus_per_machine:
            return Tier.MACHINE
        if demand <= self.gpus_per_rack:
            return Tier.RACK
        return Tier.NETWORK

    @classmethod
    def from_config(cls, section: Dict) -> "ClusterTopology":
        def link(name: str, default: TierLink) -> TierLink:
            values = section.get(name) or {}
            return TierLink(
                bandwidth_gbps=float(values.get("bandwidth_gbps", default.bandwidth_gbps)),
                latency_us=float(values.get("latency_us", default.latency_us)),
            )

        return cls(
            gpus_per_machine=int(section.get("gpus_per_machine", 8)),
            machines_per_rack=int(section.get("machines_per_rack", 8)),
            num_racks=int(section.get("num_racks", 2)),
            machine_link=link("machine", DEFAULT_MACHINE_LINK),
            rack_link=link("rack", DEFAULT_RACK_LINK),
            network_link=link("network", DEFAULT_NETWORK_LINK),
        )


Slot = Tuple[int, int, int]  # (rack_index, machine_index, gpu_count)


@dataclass(frozen=True)
class Placement:
    slots: Tuple[Slot, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(tuple(s) for s in self.slots))
        if not self.slots:
            raise ValidationError("Placement has no slots")
        seen = set()
        for rack, machine, count in self.slots:
            if count < 1:
                raise ValidationError(f"Slot ({rack},{machine}) has gpu_count {count} < 1")
            if (rack, machine) in seen:
                raise ValidationError(f"Machine ({rack},{machine}) repeated in placement")
            seen.add((rack, machine))

    @property
    def gpu_count(self) -> int:
        return sum(count for _, _, count in self.slots)

    @property
    def racks(self) -> List[int]:
        return sorted({rack for rack, _, _ in self.slots})

    @property
    def tier(self) -> Tier:
        if len(self.slots) == 1:
            return Tier.MACHINE
        if len(self.racks) == 1:
            return Tier.RACK
        return Tier.NETWORK

    def machines_per_rack(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for rack, _, _ in self.slots:
            counts[rack] = counts.get(rack, 0) + 1
        return counts

    def validate_against(self, topo: ClusterTopology) -> None:
        for rack, machine, count in self.slots:
            if not 0 <= rack < topo.num_racks:
                raise ValidationError(f"Rack index {rack} outside topology")
            if not 0 <= machine < topo.machines_per_rack:
                raise ValidationError(f"Machine index {machine} outside rack")
            if count > topo.gpus_per_machine:
                raise ValidationError(
                    f"Slot ({rack},{machine}) wants {count} GPUs, machine has {topo.gpus_per_machine}"
                )

    def describe(self) -> str:
        return "+".join(f"r{r}m{m}x{c}" for r, m, c in self.slots)


def derive_tier(placement: Placement, topo: ClusterTopology) -> Tier:
    placement.validate_against(topo)
    return placement.tier


class CapacityLedger:
    """Free-GPU counts per machine"""

    def __init__(self, topo: ClusterTopology):
        self.topo = topo
        self.free: List[List[int]] = [
            [topo.gpus_per_machine] * topo.machines_per_rack for _ in range(topo.num_racks)
        ]

    def copy(self) -> "CapacityLedger":
        clone = CapacityLedger.__new__(CapacityLedger)
        clone.topo = self.topo
        clone.free = [list(rack) for rack in self.free]
        return clone

    def free_on(self, rack: int, machine: int) -> int:
        return self.free[rack][machine]

    def rack_free(self, rack: int) -> int:
        return sum(self.free[rack])

    @property
    def total_free(self) -> int:
        return sum(sum(rack) for rack in self.free)

    @property
    def allocated(self) -> int:
        return self.topo.total_gpus - self.total_free

    def allocate(self, placement: Placement) -> None:
        for rack, machine, count in placement.slots:
            if self.free[rack][machine] < count:
                raise LedgerCorruptionError(
                    f"Allocating {count} GPUs on r{rack}m{machine} with only "
                    f"{self.free[rack][machine]} free"
                )
        for rack, machine, count in placement.slots:
            self.free[rack][machine] -= count

    def release(self, placement: Placement) -> None:
        limit = self.topo.gpus_per_machine
        for rack, machine, count in placement.slots:
            if self.free[rack][machine] + count > limit:
                raise LedgerCorruptionError(
                    f"Releasing {count} GPUs on r{rack}m{machine} would exceed capacity {limit}"
                )
        for rack, machine, count in placement.slots:
            self.free[rack][machine] += count

    def snapshot(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(rack) for rack in self.free)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CapacityLedger):
            return NotImplemented
        return self.topo == other.topo and self.free == other.free


def _machine_placement(demand: int, ledger: CapacityLedger) -> Optional[Placement]:
    best: Optional[Tuple[int, int, int]] = None
    for rack, machines in enumerate(ledger.free):
        for machine, free in enumerate(machines):
            if free >= demand and (best is None or free < best[0]):
                best = (free, rack, machine)
    if best is None:
        return None
    return Placement(slots=((best[1], best[2], demand),))


def _rack_placement(demand: int, ledger: CapacityLedger) -> Optional[Placement]:
    best_rack: Optional[Tuple[int, int]] = None
    for rack in range(len(ledger.free)):
        free = ledger.rack_free(rack)
        if free >= demand and (best_rack is None or free < best_rack[0]):
            best_rack = (free, rack)
    if best_rack is None:
        return None
    rack = best_rack[1]
    # fewest machines: largest free counts first, lowest index on ties
    order = sorted(
        (m for m, free in enumerate(ledger.free[rack]) if free > 0),
        key=lambda m: (-ledger.free[rack][m], m),
    )
    return Placement(slots=tuple(_fill(demand, ((rack, m, ledger.free[rack][m]) for m in order))))


def _network_placement(demand: int, ledger: CapacityLedger) -> Optional[Placement]:
    if ledger.total_free < demand:
        return None
    candidates = (
        (rack, machine, free)
        for rack, machines in enumerate(ledger.free)
        for machine, free in enumerate(machines)
        if free > 0
    )
    return Placement(slots=tuple(_fill(demand, candidates)))


def _fill(demand: int, candidates: Iterable[Slot]) -> List[Slot]:
    slots = []
    remaining = demand
    for rack, machine, free in candidates:
        if remaining == 0:
            break
        take = min(free, remaining)
        slots.append((rack, machine, take))
        remaining -= take
    return slots


def find_placement(demand: int, tier_cap: Tier, ledger: CapacityLedger,
                   topo: ClusterTopology) -> Optional[Placement]:
    """
    Most consolidated placement for `demand` GPUs whose tier does not exceed
    `tier_cap`, or None. Machine and rack choices are best-fit (the most
    loaded candidate that still fits, lowest index on ties).
    """
    if demand < 1:
        raise ValidationError(f"GPU demand must be >= 1, got {demand}")
    if demand > topo.total_gpus:
        raise InfeasibleDemandError(
            f"Demand of {demand} GPUs exceeds cluster capacity of {topo.total_gpus}"
        )
    if demand <= topo.gpus_per_machine:
        placement = _machine_placement(demand, ledger)
        if placement is not None:
            return placement
    if tier_cap >= Tier.RACK and demand <= topo.gpus_per_rack:
        placement = _rack_placement(demand, ledger)
        if placement is not None:
            return placement
    if tier_cap >= Tier.NETWORK:
        return _network_placement(demand, ledger)
    return None
