import unittest
from unittest.mock import MagicMock

import numpy as np

from relay_allocator.channel_model import generate_channel
from relay_allocator.constants import Objective
from relay_allocator.dtos import Budgets, SolverConfig
from relay_allocator.exchange_solver import (
    ExchangeSolver,
    solve_exchange,
    solve_uniform,
    uniform_allocation,
)
from relay_allocator.oracle import grid_maxmin
from relay_allocator.rate_model import check_feasible


class TestExchangeSolver(unittest.TestCase):
    cfg = SolverConfig(max_iters=20000)

    def test_rate_is_min_of_subproblems(self):
        ch = generate_channel(16, 4, 51)
        result = ExchangeSolver(config=self.cfg).solve(ch, Budgets.from_snr_db(5.0, 16))
        expected = min(result.ma.r_ma, result.bc.r_bc)
        self.assertAlmostEqual(expected, result.rates.r_exchange, places=9)
        np.testing.assert_array_equal(result.ma.pa1, result.allocation.p1)
        np.testing.assert_array_equal(result.bc.par, result.allocation.pr)

    def test_not_worse_than_uniform(self):
        budgets = Budgets.from_snr_db(-5.0, 16)
        for seed in range(3):
            ch = generate_channel(16, 4, 60 + seed)
            _, optimal = solve_exchange(ch, budgets, self.cfg)
            _, uniform = solve_uniform(ch, budgets)
            self.assertGreaterEqual(optimal.r_exchange, uniform.r_exchange - 1e-9)

    def test_allocation_is_feasible(self):
        budgets = Budgets.from_snr_db(10.0, 32)
        allocation, _ = solve_exchange(generate_channel(32, 8, 70), budgets, self.cfg)
        self.assertTrue(check_feasible(allocation, budgets))

    def test_matches_grid_oracle(self):
        budgets = Budgets.equal(2.0)
        for seed in range(3):
            ch = generate_channel(2, 2, 80 + seed)
            _, rates = solve_exchange(ch, budgets, self.cfg)
            oracle = grid_maxmin(ch, budgets, Objective.TYPE1, grid_points=400)
            self.assertAlmostEqual(oracle.rate, rates.r_exchange, delta=2e-3)

    def test_concurrent_mode_gives_same_result(self):
        ch = generate_channel(8, 2, 90)
        budgets = Budgets.equal(8.0)
        serial = ExchangeSolver(config=self.cfg).solve(ch, budgets)
        concurrent = ExchangeSolver(config=self.cfg, concurrent=True).solve(ch, budgets)
        self.assertEqual(serial.rates, concurrent.rates)
        self.assertEqual(serial.allocation, concurrent.allocation)

    def test_logger_receives_rates(self):
        logger = MagicMock()
        result = ExchangeSolver(config=SolverConfig(max_iters=200), logger=logger).solve(
            generate_channel(8, 2, 91), Budgets.equal(8.0)
        )
        logger.log_rates.assert_called_with("type1-opt", result.rates)
        self.assertEqual(2, logger.log_title.call_count)


class TestUniformAllocation(unittest.TestCase):
    def test_splits_each_budget_evenly(self):
        budgets = Budgets(p1_max=4.0, p2_max=2.0, pr_max=8.0)
        pa = uniform_allocation(generate_channel(4, 2, 1), budgets)
        np.testing.assert_array_equal([1.0] * 4, pa.p1)
        np.testing.assert_array_equal([0.5] * 4, pa.p2)
        np.testing.assert_array_equal([2.0] * 4, pa.pr)

    def test_uniform_rates(self):
        ch = generate_channel(4, 2, 2)
        budgets = Budgets.equal(4.0)
        pa, rates = solve_uniform(ch, budgets)
        self.assertTrue(check_feasible(pa, budgets))
        self.assertEqual("type1", rates.scheme)
        self.assertGreater(rates.r_exchange, 0.0)
