import unittest

import numpy as np

from crncore import physics
from crncore.bestresp import best_rate_at, best_rates, fill, select_best_ap, water_levels, waterfill
from crncore.model import make_rng, random_power
from tests.fixtures import make_instance, single_ap


class TestWaterfill(unittest.TestCase):

    def test_equal_channels_split_evenly(self):
        inst = single_ap([[1.0, 1.0]])
        np.testing.assert_allclose(waterfill(inst, 0, 0, [0.0, 0.0]), [0.5, 0.5])

    def test_bad_channel_left_dry(self):
        # Levels 1 and 3 with a unit budget: the mark stops at 2.
        inst = single_ap([[1.0, 1.0]])
        np.testing.assert_allclose(waterfill(inst, 0, 0, [0.0, 2.0]), [1.0, 0.0])

    def test_zero_gain_gets_no_power(self):
        inst = single_ap([[0.0, 1.0, 2.0]])
        power = waterfill(inst, 0, 0, np.zeros(3))
        self.assertEqual(power[0], 0.0)
        self.assertAlmostEqual(power.sum(), 1.0, places=12)

    def test_no_usable_channel(self):
        inst = single_ap([[0.0, 0.0]])
        np.testing.assert_array_equal(waterfill(inst, 0, 0, np.zeros(2)), [0.0, 0.0])

    def test_common_water_mark(self):
        levels = np.array([0.2, 0.5, 0.1, 3.0])
        power, mark = fill(levels, 1.0)
        active = power > 0.0
        np.testing.assert_allclose(power[active] + levels[active], mark)
        self.assertTrue(np.all(levels[~active] >= mark))
        self.assertAlmostEqual(power.sum(), 1.0, places=12)

    def test_beats_random_feasible_vectors(self):
        rng = make_rng(3)
        inst = single_ap(rng.exponential(1.0, size=(1, 5)), noise=rng.uniform(0.1, 1.0, size=5), budgets=2.0)
        interference = rng.uniform(0.0, 1.0, size=5)
        best, _ = best_rate_at(inst, 0, 0, interference)
        for _ in range(200):
            p = random_power(inst, 0, 0, rng)
            self.assertLessEqual(physics.rate(inst, 0, 0, p, interference), best + 1e-12)

    def test_levels(self):
        np.testing.assert_allclose(water_levels(np.array([2.0, 0.0]), np.array([1.0, 1.0]), np.array([1.0, 0.0])),
                                   [1.0, np.inf])

    def test_validation(self):
        inst = single_ap([[1.0, 1.0]])
        with self.assertRaises(ValueError):
            waterfill(inst, 0, 0, [0.0])
        with self.assertRaises(ValueError):
            waterfill(inst, 0, 0, [-0.1, 0.0])
        with self.assertRaises(ValueError):
            waterfill(inst, 2, 0, [0.0, 0.0])


class TestSelectBestAp(unittest.TestCase):

    def setUp(self):
        self.inst = make_instance(np.ones((1, 3, 3)))
        self.rng = make_rng(0)

    def test_stays_without_strict_improvement(self):
        self.assertEqual(select_best_ap(self.inst, 0, 1, [0.5, 0.5, 0.4], 0.5, 0.0, self.rng), 1)

    def test_picks_largest_improvement(self):
        self.assertEqual(select_best_ap(self.inst, 0, 0, [0.5, 0.7, 0.9], 0.5, 0.0, self.rng), 2)

    def test_cost_blocks_small_gains(self):
        self.assertEqual(select_best_ap(self.inst, 0, 0, [0.5, 0.7, 0.6], 0.5, 0.25, self.rng), 0)
        self.assertEqual(select_best_ap(self.inst, 0, 0, [0.5, 0.8, 0.6], 0.5, 0.25, self.rng), 1)

    def test_ties_broken_among_winners(self):
        picks = {select_best_ap(self.inst, 0, 0, [0.1, 0.9, 0.9], 0.1, 0.0, self.rng) for _ in range(50)}
        self.assertEqual(picks, {1, 2})

    def test_best_rates_per_ap(self):
        inst = make_instance([[[2.0, 0.0], [0.0, 1.0]]])
        imap = physics.interference_map(inst, [0], [[1.0, 0.0]])
        rates, powers = best_rates(inst, 0, imap)
        self.assertAlmostEqual(rates[0], np.log2(3.0) / 2.0)
        self.assertAlmostEqual(rates[1], 0.5)
        np.testing.assert_allclose(powers[1], [1.0])


if __name__ == '__main__':
    unittest.main()
