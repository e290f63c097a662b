import shutil
import tempfile
import unittest
from pathlib import Path
import sys

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from database.models import RunRecord
from database.results_db import ResultsDatabase
from reporting.comparison import RESULTS_DB_NAME, load_runs


def run(policy, racks, seed, makespan, mean_jct):
    return RunRecord(
        run_name=f"{policy}_r{racks}_s{seed}", policy=policy, num_racks=racks, seed=seed, num_jobs=10,
        makespan=makespan, mean_jct=mean_jct, p99_jct=mean_jct * 2, mean_queueing_delay=10.0,
        mean_comm_latency=5.0, mean_utilization=0.5, output_dir="/tmp/x", created_at=0.0,
    )


class TestResultsDatabase(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_record_and_list(self):
        with ResultsDatabase(str(Path(self.temp_dir) / RESULTS_DB_NAME)) as db:
            for record in [run("tiresias", 4, 0, 1.0, 1.0), run("dally", 2, 1, 2.0, 2.0),
                           run("dally", 2, 0, 3.0, 3.0)]:
                db.record_run(record)
            names = [r.run_name for r in db.list_runs()]
            self.assertEqual(names, ["dally_r2_s0", "dally_r2_s1", "tiresias_r4_s0"])
            self.assertEqual(len(db.list_runs(policy="dally")), 2)
            self.assertEqual(len(db.list_runs(num_racks=4)), 1)

    def test_rerun_replaces_row(self):
        path = str(Path(self.temp_dir) / RESULTS_DB_NAME)
        with ResultsDatabase(path) as db:
            db.record_run(run("dally", 2, 0, 1.0, 1.0))
            db.record_run(run("dally", 2, 0, 9.0, 1.0))
        runs = load_runs(self.temp_dir)
        self.assertEqual(len(runs), 1)
        self.assertEqual(runs[0].makespan, 9.0)
        self.assertIsNotNone(runs[0].run_id)

    def test_filter_by_policy_and_racks(self):
        with ResultsDatabase(str(Path(self.temp_dir) / RESULTS_DB_NAME)) as db:
            db.record_run(run("gandiva", 2, 0, 1.0, 1.0))
            db.record_run(run("gandiva", 4, 0, 1.0, 1.0))
            [record] = db.list_runs(policy="gandiva", num_racks=2)
            self.assertEqual(record.run_name, "gandiva_r2_s0")
            self.assertEqual(db.list_runs(policy="missing"), [])

    def test_load_runs_without_db(self):
        with self.assertRaises(FileNotFoundError):
            load_runs(self.temp_dir)


if __name__ == '__main__':
    unittest.main()
