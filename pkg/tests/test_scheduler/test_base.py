import unittest
from pathlib import Path
import sys

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.job import JobPhase, JobSpec, JobState
from core.topology import CapacityLedger, ClusterTopology, Placement, Tier
from scheduler.base import OfferDecision, ResourceOffer, TierFeasibility, plan_preemptions


def job_on(job_id, placement, ledger):
    job = JobState.arrive(JobSpec(job_id, 0.0, "resnet50", placement.gpu_count, 10, 1.0), 0.0)
    job.phase = JobPhase.RUNNING
    job.placement = placement
    ledger.allocate(placement)
    return job


class TestResourceOffer(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology(gpus_per_machine=8, machines_per_rack=2, num_racks=2)
        self.ledger = CapacityLedger(self.topo)

    def test_fragmented_cluster(self):
        for rack in range(2):
            for machine in range(2):
                self.ledger.allocate(Placement(((rack, machine, 5),)))
        offer = ResourceOffer.build(4, self.ledger, self.topo)
        self.assertEqual(offer.feasibility, TierFeasibility(False, True, True))
        self.assertEqual(offer.placement_for(OfferDecision.ACCEPT_RACK), offer.rack)
        self.assertEqual(offer.rack.tier, Tier.RACK)
        self.assertIsNone(offer.placement_for(OfferDecision.REJECT))

    def test_machine_offer_fills_every_cap(self):
        offer = ResourceOffer.build(2, self.ledger, self.topo)
        self.assertEqual(offer.feasibility, TierFeasibility(True, True, True))
        self.assertEqual(offer.network, offer.machine)

    def test_empty_offer(self):
        self.ledger.allocate(Placement(tuple((r, m, 8) for r in range(2) for m in range(2))))
        offer = ResourceOffer.build(1, self.ledger, self.topo)
        self.assertTrue(offer.is_empty)
        self.assertIsNone(offer.feasibility.best_feasible())

    def test_decision_tiers(self):
        self.assertEqual(OfferDecision.accept(Tier.NETWORK), OfferDecision.ACCEPT_NETWORK)
        self.assertEqual(OfferDecision.ACCEPT_RACK.tier, Tier.RACK)
        self.assertFalse(OfferDecision.REJECT.accepted)


class TestPlanPreemptions(unittest.TestCase):

    def setUp(self):
        self.topo = ClusterTopology(gpus_per_machine=8, machines_per_rack=2, num_racks=1)
        self.ledger = CapacityLedger(self.topo)
        self.small = job_on("small", Placement(((0, 0, 2),)), self.ledger)
        self.other = job_on("other", Placement(((0, 0, 6),)), self.ledger)
        self.full = job_on("full", Placement(((0, 1, 8),)), self.ledger)
        self.waiting = JobState.arrive(JobSpec("w", 0.0, "resnet50", 8, 10, 1.0), 0.0)

    def test_victim_set_is_pruned_to_minimal(self):
        victims = plan_preemptions(
            [self.waiting], self.ledger, self.topo,
            cap_for=lambda job: Tier.MACHINE,
            candidates_for=lambda job: [self.small, self.full],
            max_victims=4,
        )
        self.assertEqual(victims, [self.full])

    def test_respects_victim_budget(self):
        victims = plan_preemptions(
            [self.waiting], self.ledger, self.topo,
            cap_for=lambda job: Tier.MACHINE,
            candidates_for=lambda job: [self.small, self.other],
            max_victims=1,
        )
        self.assertEqual(victims, [])

    def test_ledger_is_not_touched(self):
        before = self.ledger.snapshot()
        plan_preemptions([self.waiting], self.ledger, self.topo,
                         cap_for=lambda job: Tier.MACHINE,
                         candidates_for=lambda job: [self.full], max_victims=4)
        self.assertEqual(self.ledger.snapshot(), before)

    def test_skipped_job_claims_nothing(self):
        victims = plan_preemptions([self.waiting], self.ledger, self.topo,
                                   cap_for=lambda job: None,
                                   candidates_for=lambda job: [self.full], max_victims=4)
        self.assertEqual(victims, [])

    def test_pair_taken_when_no_single_victim_suffices(self):
        victims = plan_preemptions([self.waiting], self.ledger, self.topo,
                                   cap_for=lambda job: Tier.MACHINE,
                                   candidates_for=lambda job: [self.small, self.other], max_victims=4)
        self.assertEqual(victims, [self.small, self.other])


class TestPlanMoves(unittest.TestCase):
    """A running job in the plan is moved, freeing its own GPUs first"""

    def setUp(self):
        self.topo = ClusterTopology(gpus_per_machine=8, machines_per_rack=2, num_racks=1)
        self.ledger = CapacityLedger(self.topo)
        self.left = job_on("left", Placement(((0, 0, 4),)), self.ledger)
        self.right = job_on("right", Placement(((0, 1, 4),)), self.ledger)
        self.spread = job_on("spread", Placement(((0, 0, 4), (0, 1, 4))), self.ledger)

    def _plan(self, max_victims):
        return plan_preemptions([self.spread], self.ledger, self.topo,
                                cap_for=lambda job: Tier.MACHINE,
                                candidates_for=lambda job: [self.left, self.right, self.spread],
                                max_victims=max_victims)

    def test_mover_and_one_neighbour(self):
        self.assertEqual(self._plan(4), [self.spread, self.left])

    def test_mover_counts_against_budget(self):
        self.assertEqual(self._plan(1), [])

    def test_free_machine_needs_no_victim(self):
        self.ledger.release(self.right.placement)
        self.assertEqual(self._plan(4), [self.spread])


if __name__ == '__main__':
    unittest.main()
