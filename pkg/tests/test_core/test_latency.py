import math
import random
import shutil
import tempfile
import unittest
from pathlib import Path
import sys

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import ConfigError, MissingProfileError, ValidationError
from core.latency import (
    AnalyticalAllReduceModel, ModelProfile, ProfileCatalog, ProfileTableModel, SkewClass,
    StaticPenaltyModel, build_latency_model, hierarchical_allreduce_cost,
)
from core.topology import ClusterTopology, Placement, Tier, TierLink


def ring_time(n, size, bandwidth_gbps, latency_us):
    if n <= 1:
        return 0.0
    bw = bandwidth_gbps * 1e9 / 8.0
    return 2 * (n - 1) * latency_us * 1e-6 + 2 * (n - 1) / n * size / bw


class TestProfileCatalog(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def _write(self, text):
        path = Path(self.temp_dir) / "profiles.csv"
        path.write_text(text)
        return path

    def test_shipped_profiles(self):
        catalog = ProfileCatalog.load()
        self.assertEqual(len(catalog), 6)
        resnet18 = catalog.get("ResNet18")
        self.assertEqual(resnet18.comm_fraction[Tier.RACK], 1.16)
        self.assertEqual(resnet18.skew_class, SkewClass.LOW)
        self.assertTrue(catalog.get("mobilenetv3").is_high_skew)
        self.assertIn("vgg11", catalog)

    def test_missing_model(self):
        with self.assertRaises(MissingProfileError) as ctx:
            ProfileCatalog.load().get("gpt5")
        self.assertEqual(ctx.exception.model_name, "gpt5")

    def test_bad_header(self):
        path = self._write("name,a,b\nvgg11,1,2\n")
        with self.assertRaises(ValidationError):
            ProfileCatalog.load(path)

    def test_negative_fraction(self):
        path = self._write(
            "model,machine_frac,rack_frac,network_frac,gradient_bytes,skew\n"
            "m,0.1,-0.2,0.3,,low\n"
        )
        with self.assertRaises(ValidationError):
            ProfileCatalog.load(path)

    def test_optional_gradient_bytes(self):
        path = self._write(
            "model,machine_frac,rack_frac,network_frac,gradient_bytes,skew\n"
            "m,0.1,0.2,0.3,,HIGH\n"
        )
        profile = ProfileCatalog.load(path).get("M")
        self.assertIsNone(profile.gradient_bytes)
        self.assertEqual(profile.skew_class, SkewClass.HIGH)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            ProfileCatalog.load(Path(self.temp_dir) / "nope.csv")


class TestProfileTableModel(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology()
        self.catalog = ProfileCatalog.load()
        self.model = ProfileTableModel()

    def test_fraction_of_compute(self):
        rack = Placement(((0, 0, 8), (0, 1, 8)))
        latency = self.model.comm_latency(self.catalog.get("resnet18"), rack, self.topo, 0.5)
        self.assertAlmostEqual(latency, 0.58)
        network = Placement(((0, 0, 8), (1, 0, 8)))
        latency = self.model.comm_latency(self.catalog.get("mobilenetv3"), network, self.topo, 1.0)
        self.assertAlmostEqual(latency, 195.92)

    def test_rejects_bad_compute(self):
        with self.assertRaises(ValidationError):
            self.model.comm_latency(self.catalog.get("vgg11"), Placement(((0, 0, 1),)), self.topo, 0)


class TestAnalyticalAllReduce(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology(
            gpus_per_machine=8, machines_per_rack=4, num_racks=4,
            machine_link=TierLink(900, 1), rack_link=TierLink(400, 5), network_link=TierLink(100, 10),
        )

    def test_single_gpu_costs_nothing(self):
        self.assertEqual(hierarchical_allreduce_cost(1e9, Placement(((2, 3, 1),)), self.topo), 0.0)

    def test_matches_staged_ring_formula(self):
        rng = random.Random(7)
        for _ in range(200):
            racks = rng.sample(range(4), rng.randint(1, 4))
            slots = []
            for rack in racks:
                for machine in rng.sample(range(4), rng.randint(1, 4)):
                    slots.append((rack, machine, rng.randint(1, 8)))
            placement = Placement(tuple(slots))
            size = rng.uniform(1e6, 2e9)

            n_machine = max(count for _, _, count in slots)
            per_rack = {}
            for rack, _, _ in slots:
                per_rack[rack] = per_rack.get(rack, 0) + 1
            expected = (
                ring_time(n_machine, size, 900, 1)
                + ring_time(max(per_rack.values()), size, 400, 5)
                + ring_time(len(per_rack), size, 100, 10)
            )
            actual = hierarchical_allreduce_cost(size, placement, self.topo)
            self.assertTrue(math.isclose(actual, expected, rel_tol=1e-9, abs_tol=1e-15),
                            f"{slots}: {actual} != {expected}")

    def test_requires_gradient_bytes(self):
        profile = ModelProfile("m", {t: 0.1 for t in Tier}, SkewClass.LOW)
        with self.assertRaises(MissingProfileError):
            AnalyticalAllReduceModel().comm_latency(profile, Placement(((0, 0, 2),)), self.topo, 1.0)

    def test_model_ignores_compute_time(self):
        profile = ProfileCatalog.load().get("resnet50")
        placement = Placement(((0, 0, 8), (0, 1, 8)))
        model = AnalyticalAllReduceModel()
        self.assertEqual(
            model.comm_latency(profile, placement, self.topo, 0.1),
            model.comm_latency(profile, placement, self.topo, 2.0),
        )


class TestStaticPenalty(unittest.TestCase):

    def test_same_penalty_for_every_model(self):
        topo = ClusterTopology()
        model = build_latency_model({
            "variant": "static_penalty",
            "static_penalty": {"machine": 0.0, "rack": 0.5, "network": 2.0},
        })
        self.assertIsInstance(model, StaticPenaltyModel)
        network = Placement(((0, 0, 4), (1, 0, 4)))
        for name in ("vgg11", "bert_large"):
            profile = ProfileCatalog.load().get(name)
            self.assertAlmostEqual(model.comm_latency(profile, network, topo, 0.4), 0.8)

    def test_negative_penalty(self):
        with self.assertRaises(ConfigError):
            StaticPenaltyModel({Tier.MACHINE: 0, Tier.RACK: -1, Tier.NETWORK: 1})

    def test_unknown_variant(self):
        with self.assertRaises(ConfigError):
            build_latency_model({"variant": "magic"})
        self.assertIsInstance(build_latency_model({}), ProfileTableModel)


if __name__ == '__main__':
    unittest.main()
