import unittest
from pathlib import Path
import sys

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import ConfigError, InfeasibleDemandError, LedgerCorruptionError, ValidationError
from core.topology import (
    CapacityLedger, ClusterTopology, Placement, Tier, TierLink, derive_tier, find_placement,
)


class TestClusterTopology(unittest.TestCase):

    def test_default_shape(self):
        topo = ClusterTopology()
        self.assertEqual(topo.gpus_per_rack, 64)
        self.assertEqual(topo.num_machines, 16)
        self.assertEqual(topo.total_gpus, 128)

    def test_best_tier_for(self):
        topo = ClusterTopology()
        self.assertEqual(topo.best_tier_for(1), Tier.MACHINE)
        self.assertEqual(topo.best_tier_for(8), Tier.MACHINE)
        self.assertEqual(topo.best_tier_for(16), Tier.RACK)
        self.assertEqual(topo.best_tier_for(64), Tier.RACK)
        self.assertEqual(topo.best_tier_for(65), Tier.NETWORK)

    def test_rack_count_scales_capacity(self):
        topo = ClusterTopology.from_config({"num_racks": 8})
        self.assertEqual(topo.num_racks, 8)
        self.assertEqual(topo.total_gpus, 512)

    def test_invalid_shape(self):
        with self.assertRaises(ConfigError):
            ClusterTopology(gpus_per_machine=0)

    def test_from_config_links(self):
        topo = ClusterTopology.from_config({
            "gpus_per_machine": 4,
            "num_racks": 3,
            "rack": {"bandwidth_gbps": 100, "latency_us": 2.5},
        })
        self.assertEqual(topo.gpus_per_machine, 4)
        self.assertEqual(topo.num_racks, 3)
        self.assertEqual(topo.rack_link, TierLink(100.0, 2.5))
        self.assertEqual(topo.machine_link.bandwidth_gbps, 900.0)

    def test_link_units(self):
        link = TierLink(bandwidth_gbps=800, latency_us=10)
        self.assertEqual(link.bytes_per_second, 1e11)
        self.assertAlmostEqual(link.latency_seconds, 1e-5)
        with self.assertRaises(ConfigError):
            TierLink(bandwidth_gbps=0, latency_us=1)


class TestPlacement(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology()

    def test_tier_derivation(self):
        self.assertEqual(derive_tier(Placement(((0, 3, 8),)), self.topo), Tier.MACHINE)
        self.assertEqual(derive_tier(Placement(((1, 0, 8), (1, 1, 8))), self.topo), Tier.RACK)
        self.assertEqual(derive_tier(Placement(((0, 0, 8), (1, 0, 8))), self.topo), Tier.NETWORK)

    def test_gpu_count_and_racks(self):
        placement = Placement(((0, 0, 3), (1, 2, 5)))
        self.assertEqual(placement.gpu_count, 8)
        self.assertEqual(placement.racks, [0, 1])
        self.assertEqual(placement.machines_per_rack(), {0: 1, 1: 1})

    def test_invalid_slots(self):
        with self.assertRaises(ValidationError):
            Placement(())
        with self.assertRaises(ValidationError):
            Placement(((0, 0, 0),))
        with self.assertRaises(ValidationError):
            Placement(((0, 0, 2), (0, 0, 2)))

    def test_validate_against_topology(self):
        with self.assertRaises(ValidationError):
            Placement(((5, 0, 1),)).validate_against(self.topo)
        with self.assertRaises(ValidationError):
            Placement(((0, 0, 9),)).validate_against(self.topo)


class TestCapacityLedger(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology(gpus_per_machine=8, machines_per_rack=2, num_racks=2)
        self.ledger = CapacityLedger(self.topo)

    def test_allocate_and_release(self):
        placement = Placement(((0, 1, 5),))
        self.ledger.allocate(placement)
        self.assertEqual(self.ledger.free_on(0, 1), 3)
        self.assertEqual(self.ledger.allocated, 5)
        self.ledger.release(placement)
        self.assertEqual(self.ledger.total_free, 32)

    def test_over_allocation_leaves_ledger_untouched(self):
        self.ledger.allocate(Placement(((0, 0, 6),)))
        before = self.ledger.snapshot()
        with self.assertRaises(LedgerCorruptionError):
            self.ledger.allocate(Placement(((0, 1, 1), (0, 0, 3))))
        self.assertEqual(self.ledger.snapshot(), before)

    def test_over_release(self):
        with self.assertRaises(LedgerCorruptionError):
            self.ledger.release(Placement(((1, 1, 1),)))

    def test_copy_is_independent(self):
        clone = self.ledger.copy()
        clone.allocate(Placement(((1, 0, 8),)))
        self.assertEqual(self.ledger.total_free, 32)
        self.assertNotEqual(clone, self.ledger)


class TestFindPlacement(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology(gpus_per_machine=8, machines_per_rack=4, num_racks=2)
        self.ledger = CapacityLedger(self.topo)

    def test_machine_best_fit(self):
        # machines with 8, 3, 5, 8 free in rack 0
        self.ledger.allocate(Placement(((0, 1, 5), (0, 2, 3))))
        placement = find_placement(3, Tier.MACHINE, self.ledger, self.topo)
        self.assertEqual(placement.slots, ((0, 1, 3),))
        placement = find_placement(4, Tier.MACHINE, self.ledger, self.topo)
        self.assertEqual(placement.slots, ((0, 2, 4),))

    def test_machine_cap_returns_none_when_fragmented(self):
        for m in range(4):
            self.ledger.allocate(Placement(((0, m, 6),)))
            self.ledger.allocate(Placement(((1, m, 6),)))
        self.assertIsNone(find_placement(4, Tier.MACHINE, self.ledger, self.topo))
        rack = find_placement(4, Tier.RACK, self.ledger, self.topo)
        self.assertEqual(rack.tier, Tier.RACK)
        self.assertEqual(rack.gpu_count, 4)

    def test_rack_best_fit_prefers_fullest_rack(self):
        self.ledger.allocate(Placement(((0, 0, 8),)))
        placement = find_placement(16, Tier.RACK, self.ledger, self.topo)
        self.assertEqual(placement.racks, [0])
        self.assertEqual(placement.tier, Tier.RACK)

    def test_rack_fill_uses_fewest_machines(self):
        self.ledger.allocate(Placement(((0, 0, 7), (0, 2, 2))))
        placement = find_placement(12, Tier.RACK, self.ledger, self.topo)
        self.assertEqual(placement.slots, ((0, 1, 8), (0, 3, 4)))

    def test_network_spans_racks(self):
        placement = find_placement(40, Tier.NETWORK, self.ledger, self.topo)
        self.assertEqual(placement.tier, Tier.NETWORK)
        self.assertEqual(placement.gpu_count, 40)
        self.assertIsNone(find_placement(40, Tier.RACK, self.ledger, self.topo))

    def test_prefers_consolidated_even_under_network_cap(self):
        placement = find_placement(8, Tier.NETWORK, self.ledger, self.topo)
        self.assertEqual(placement.tier, Tier.MACHINE)

    def test_not_enough_free(self):
        self.ledger.allocate(Placement(tuple((0, m, 8) for m in range(4))))
        self.ledger.allocate(Placement(tuple((1, m, 8) for m in range(3))))
        self.assertIsNone(find_placement(9, Tier.NETWORK, self.ledger, self.topo))

    def test_invalid_demands(self):
        with self.assertRaises(ValidationError):
            find_placement(0, Tier.NETWORK, self.ledger, self.topo)
        with self.assertRaises(InfeasibleDemandError):
            find_placement(65, Tier.NETWORK, self.ledger, self.topo)


if __name__ == '__main__':
    unittest.main()
