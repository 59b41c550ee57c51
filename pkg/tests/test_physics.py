import unittest

import numpy as np

from crncore import physics
from crncore.model import ScenarioConfig, generate_snapshot, make_rng, random_power, random_powers
from tests.fixtures import make_instance, single_ap


class TestRate(unittest.TestCase):

    def test_single_user_rate(self):
        inst = single_ap([[1.0, 1.0]])
        self.assertAlmostEqual(physics.rate(inst, 0, 0, [1.0, 1.0], [0.0, 0.0]), 1.0, places=12)

    def test_zero_power_zero_rate(self):
        inst = single_ap([[3.0, 2.0]])
        self.assertEqual(physics.rate(inst, 0, 0, [0.0, 0.0], [0.5, 0.5]), 0.0)

    def test_normalized_by_all_channels(self):
        # AP 0 owns one of two channels; the rate is still divided by K = 2.
        inst = make_instance(np.ones((1, 2, 2)))
        self.assertAlmostEqual(physics.rate(inst, 0, 0, [1.0], [0.0]), 0.5, places=12)

    def test_log_base(self):
        inst = single_ap([[1.0]])
        self.assertAlmostEqual(physics.rate(inst, 0, 0, [np.e - 1.0], [0.0], base=np.e), 1.0, places=12)

    def test_shape_mismatch(self):
        inst = single_ap([[1.0, 1.0]])
        with self.assertRaises(ValueError):
            physics.rate(inst, 0, 0, [1.0], [0.0, 0.0])


class TestInterference(unittest.TestCase):

    def test_home_excludes_self_and_other_ap_sees_everyone(self):
        inst = make_instance([[[2.0, 0.0], [0.0, 1.0]],
                              [[3.0, 0.0], [0.0, 4.0]]])
        assoc = np.array([0, 0])
        powers = np.array([[1.0, 0.0], [0.5, 0.0]])
        imap = physics.interference_map(inst, assoc, powers)
        self.assertAlmostEqual(imap.at(0, 0)[0], 1.5)
        self.assertAlmostEqual(imap.at(1, 0)[0], 2.0)
        self.assertAlmostEqual(imap.at(0, 1)[0], 0.0)
        np.testing.assert_allclose(imap.received, [3.5, 0.0])

    def test_realized_rates_match_rate(self):
        inst = generate_snapshot(ScenarioConfig(num_cus=5, num_aps=2, num_channels=6), 2)
        rng = make_rng(0)
        assoc = rng.integers(2, size=5)
        powers = random_powers(inst, assoc, rng)
        imap = physics.interference_map(inst, assoc, powers)
        rates = physics.realized_rates(inst, assoc, powers)
        for i in range(5):
            channels = inst.channels_of(assoc[i])
            expected = physics.rate(inst, i, assoc[i], powers[i, channels], imap.at(i, assoc[i]))
            self.assertAlmostEqual(rates[i], expected, places=12)
        self.assertAlmostEqual(physics.sum_rate(inst, assoc, powers), rates.sum(), places=12)


class TestPotential(unittest.TestCase):

    def test_empty_ap(self):
        inst = single_ap([[1.0, 1.0]])
        self.assertEqual(physics.potential_ap(inst, 0, [], np.zeros((0, 2))), 0.0)

    def test_unilateral_change_equals_rate_change(self):
        rng = make_rng(5)
        inst = generate_snapshot(ScenarioConfig(num_cus=4, num_aps=2, num_channels=8), 9)
        occupants = [0, 2, 3]
        channels = inst.channels_of(1)
        for _ in range(50):
            block = np.vstack([random_power(inst, i, 1, rng) for i in occupants])
            changed = block.copy()
            changed[1] = random_power(inst, 2, 1, rng)
            interference = np.sum(inst.gains[occupants][:, 1, channels] * block, axis=0) \
                - inst.gains[2, 1, channels] * block[1]
            delta_rate = physics.rate(inst, 2, 1, changed[1], interference) \
                - physics.rate(inst, 2, 1, block[1], interference)
            delta_potential = physics.potential_ap(inst, 1, occupants, changed) \
                - physics.potential_ap(inst, 1, occupants, block)
            self.assertAlmostEqual(delta_rate, delta_potential, delta=1e-9)

    def test_concave_along_segments(self):
        rng = make_rng(6)
        inst = generate_snapshot(ScenarioConfig(num_cus=4, num_aps=2, num_channels=8), 10)
        occupants = [0, 1, 3]
        for _ in range(50):
            a = np.vstack([random_power(inst, i, 0, rng) for i in occupants])
            b = np.vstack([random_power(inst, i, 0, rng) for i in occupants])
            share = rng.uniform()
            mixed = physics.potential_ap(inst, 0, occupants, share * a + (1.0 - share) * b)
            chord = share * physics.potential_ap(inst, 0, occupants, a) \
                + (1.0 - share) * physics.potential_ap(inst, 0, occupants, b)
            self.assertGreaterEqual(mixed, chord - 1e-12)

    def test_increasing_in_every_power(self):
        rng = make_rng(7)
        inst = generate_snapshot(ScenarioConfig(num_cus=3, num_aps=2, num_channels=6), 11)
        occupants = [0, 1, 2]
        block = 0.5 * np.vstack([random_power(inst, i, 1, rng) for i in occupants])
        before = physics.potential_ap(inst, 1, occupants, block)
        for row in range(3):
            for k in range(block.shape[1]):
                raised = block.copy()
                raised[row, k] += 0.1
                self.assertGreater(physics.potential_ap(inst, 1, occupants, raised), before)

    def test_single_occupant_potential_is_its_rate(self):
        inst = single_ap([[2.0, 0.5]], noise=[1.0, 0.5])
        p = np.array([0.3, 0.7])
        self.assertAlmostEqual(physics.potential_ap(inst, 0, [0], p[None, :]),
                               physics.rate(inst, 0, 0, p, [0.0, 0.0]), places=12)

    def test_system_potential_sums_aps(self):
        inst = generate_snapshot(ScenarioConfig(num_cus=4, num_aps=3, num_channels=6), 1)
        assoc = np.array([0, 0, 2, 2])
        powers = random_powers(inst, assoc, make_rng(2))
        expected = sum(physics.potential_ap(inst, w, np.flatnonzero(assoc == w),
                                            powers[np.ix_(np.flatnonzero(assoc == w), inst.channels_of(w))])
                       for w in range(3))
        self.assertAlmostEqual(physics.system_potential(inst, assoc, powers), expected, places=12)


if __name__ == '__main__':
    unittest.main()
