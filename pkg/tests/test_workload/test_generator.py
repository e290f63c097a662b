import shutil
import tempfile
import unittest
from pathlib import Path
import sys

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import ConfigError, ValidationError
from core.job import JobSpec
from workload.generator import (
    DEMAND_CHOICES, build_workload, gen_trace, generate_jobs, parse_demand_weights, parse_range,
    poissonize,
)
from workload.trace import ArrivalMode, load_trace


def batch(n):
    return [JobSpec(f"j{i}", 0.0, "resnet50", 8, 100, 1.0) for i in range(n)]


class TestPoissonize(unittest.TestCase):

    def test_same_seed_same_arrivals(self):
        first = [j.arrival_time for j in poissonize(batch(50), 0.05, seed=9)]
        second = [j.arrival_time for j in poissonize(batch(50), 0.05, seed=9)]
        self.assertEqual(first, second)
        other = [j.arrival_time for j in poissonize(batch(50), 0.05, seed=10)]
        self.assertNotEqual(first, other)

    def test_mean_gap_matches_rate(self):
        arrivals = [j.arrival_time for j in poissonize(batch(10000), 0.01, seed=1)]
        gaps = np.diff([0.0] + arrivals)
        self.assertTrue(all(g > 0 for g in gaps))
        self.assertAlmostEqual(float(np.mean(gaps)), 100.0, delta=5.0)

    def test_huge_rate_collapses_to_batch(self):
        arrivals = [j.arrival_time for j in poissonize(batch(20), 1e9, seed=0)]
        self.assertLess(max(arrivals), 1e-5)

    def test_sorted_and_ids_kept(self):
        jobs = poissonize(batch(30), 0.1, seed=4)
        times = [j.arrival_time for j in jobs]
        self.assertEqual(times, sorted(times))
        self.assertEqual(sorted(j.job_id for j in jobs), sorted(f"j{i}" for i in range(30)))

    def test_rate_must_be_positive(self):
        with self.assertRaises(ValidationError):
            poissonize(batch(3), 0.0)


class TestBuildWorkload(unittest.TestCase):

    def test_batch_mode_zeroes_arrivals(self):
        jobs = [JobSpec("a", 12.0, "resnet50", 8, 100, 1.0)]
        workload = build_workload(jobs, "batch")
        self.assertEqual(workload.arrival_mode, ArrivalMode.BATCH)
        self.assertEqual(workload.jobs[0].arrival_time, 0.0)

    def test_poisson_requires_rate(self):
        with self.assertRaises(ConfigError):
            build_workload(batch(3), "poisson")
        workload = build_workload(batch(3), "poisson", rate=0.5, seed=2)
        self.assertEqual(workload.rate, 0.5)
        self.assertTrue(all(j.arrival_time > 0 for j in workload.jobs))

    def test_unknown_mode(self):
        with self.assertRaises(ConfigError):
            build_workload(batch(1), "bursty")


class TestGenerateJobs(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_ranges_respected(self):
        jobs = generate_jobs(500, ["resnet50", "vgg11"], iteration_range=(10, 20),
                             compute_range=(0.5, 0.6), seed=3)
        self.assertEqual(len(jobs), 500)
        self.assertEqual(jobs[0].job_id, "j000")
        for job in jobs:
            self.assertIn(job.model_name, ("resnet50", "vgg11"))
            self.assertIn(job.gpu_demand, DEMAND_CHOICES)
            self.assertTrue(10 <= job.total_expected_iterations <= 20)
            self.assertTrue(0.5 <= job.compute_time_per_iter <= 0.6)
            self.assertEqual(job.arrival_time, 0.0)

    def test_demand_weights(self):
        jobs = generate_jobs(10000, ["resnet50"], demand_weights={8: 0.95, 16: 0.05}, seed=0)
        share = sum(1 for job in jobs if job.gpu_demand == 8) / len(jobs)
        self.assertGreaterEqual(share, 0.9)
        self.assertEqual({job.gpu_demand for job in jobs}, {8, 16})

    def test_gen_trace_is_reproducible(self):
        args = dict(n_jobs=500, models=["resnet18", "bert_large"], demand_weights=None,
                    iteration_range=(1000, 10000), compute_range=(0.1, 1.0), seed=42)
        first = gen_trace(out_path=Path(self.temp_dir) / "a.csv", **args)
        second = gen_trace(out_path=Path(self.temp_dir) / "b.csv", **args)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual(len(load_trace(first)), 500)

    def test_parsers(self):
        self.assertEqual(parse_demand_weights("8=0.9, 16=0.1"), {8: 0.9, 16: 0.1})
        self.assertEqual(parse_range("5:10", int), (5, 10))
        with self.assertRaises(ConfigError):
            parse_range("10:5", int)
        with self.assertRaises(ConfigError):
            parse_demand_weights("eight")
        with self.assertRaises(ConfigError):
            generate_jobs(5, ["resnet50"], demand_weights={3: 1.0})

    def test_compute_below_trace_precision_rejected(self):
        """Compute times that would round to zero in the trace file are refused"""
        with self.assertRaises(ConfigError):
            generate_jobs(5, ["resnet50"], compute_range=(1e-9, 1e-8))
        with self.assertRaises(ConfigError):
            generate_jobs(5, ["resnet50"], compute_range=(0.0, 1.0))

    def test_smallest_compute_survives_trace_file(self):
        path = gen_trace(5, ["resnet50"], None, (10, 20), (1e-6, 2e-6), 7,
                         Path(self.temp_dir) / "tiny.csv")
        for job in load_trace(path):
            self.assertGreater(job.compute_time_per_iter, 0.0)


if __name__ == '__main__':
    unittest.main()
