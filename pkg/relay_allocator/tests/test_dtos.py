import unittest

import numpy as np

from relay_allocator.constants import DualUpdate, StepRule
from relay_allocator.dtos import Budgets, ChannelRealization, PowerAllocation, SolverConfig
from relay_allocator.exceptions import BudgetError, ConfigError, DimensionError


class TestBudgets(unittest.TestCase):
    def test_from_snr_db(self):
        budgets = Budgets.from_snr_db(10.0, 32, mu=0.4)
        self.assertAlmostEqual(320.0, budgets.p1_max)
        self.assertEqual(budgets.p1_max, budgets.pr_max)
        self.assertEqual(0.4, budgets.mu)

    def test_mu_bounds(self):
        for mu in (0.0, 1.0, 1.5):
            with self.assertRaises(BudgetError):
                Budgets.equal(1.0, mu=mu)

    def test_negative_budget(self):
        with self.assertRaises(BudgetError):
            Budgets(p1_max=1.0, p2_max=-1.0, pr_max=1.0)


class TestSolverConfig(unittest.TestCase):
    def test_step_rules(self):
        self.assertAlmostEqual(0.25, SolverConfig(step0=0.5).step(4))
        self.assertAlmostEqual(0.125, SolverConfig(step0=0.5, step_rule=StepRule.HARMONIC).step(4))

    def test_defaults(self):
        cfg = SolverConfig()
        self.assertEqual(0.1, cfg.step0)
        self.assertEqual(1e-6, cfg.epsilon)
        self.assertEqual(DualUpdate.PLAIN, cfg.dual_update)

    def test_rejects_bad_values(self):
        invalid = ({"epsilon": 0.0}, {"step0": -1.0}, {"max_iters": 0}, {"averaging_fraction": 0.0})
        for kwargs in invalid:
            with self.assertRaises(ConfigError):
                SolverConfig(**kwargs)


class TestArrays(unittest.TestCase):
    def test_allocation_lengths_must_match(self):
        with self.assertRaises(DimensionError):
            PowerAllocation(p1=[1.0], p2=[1.0, 2.0], pr=[1.0])

    def test_zeros(self):
        pa = PowerAllocation.zeros(3)
        self.assertEqual(3, pa.n_subcarriers)
        np.testing.assert_array_equal(np.zeros(3), pa.pr)

    def test_channel_equality(self):
        ones = np.ones(2)
        a = ChannelRealization(g1=ones, g2=ones, gt1=ones, gt2=ones)
        b = ChannelRealization(g1=[1.0, 1.0], g2=ones, gt1=ones, gt2=ones)
        self.assertEqual(a, b)
