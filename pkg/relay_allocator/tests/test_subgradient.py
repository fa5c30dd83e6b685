import unittest

import numpy as np

from relay_allocator.dtos import DualPoint
from relay_allocator.subgradient import DualSubgradientSolver


class TestDualStep(unittest.TestCase):
    def test_moves_against_constraint_values(self):
        dual = DualPoint(lam=np.array([0.5, 0.3, 0.2]), alpha=np.array([0.4, 0.1]))
        moved = DualSubgradientSolver._step(
            dual, np.array([1.0, 2.0, 3.0]), np.array([-2.0, 1.0]), step=0.1
        )
        np.testing.assert_allclose([0.6, 0.3, 0.1], moved.lam, atol=1e-12)
        np.testing.assert_allclose([0.2, 0.2], moved.alpha, atol=1e-12)

    def test_projects_both_blocks(self):
        dual = DualPoint(lam=np.array([0.9, 0.1, 0.0]), alpha=np.array([0.05, 0.3]))
        moved = DualSubgradientSolver._step(
            dual, np.array([10.0, 0.0, 0.0]), np.array([-1.0, 0.0]), step=0.1
        )
        self.assertAlmostEqual(1.0, moved.lam.sum(), places=12)
        self.assertGreaterEqual(moved.lam.min(), 0.0)
        np.testing.assert_allclose([0.0, 0.3], moved.alpha)

    def test_equal_constraints_keep_weights(self):
        dual = DualPoint(lam=np.array([0.2, 0.5, 0.3]), alpha=np.array([0.1, 0.1]))
        moved = DualSubgradientSolver._step(
            dual, np.full(3, 4.0), np.zeros(2), step=0.05
        )
        np.testing.assert_allclose(dual.lam, moved.lam, atol=1e-12)
        np.testing.assert_array_equal(dual.alpha, moved.alpha)

    def test_scaled_step_is_relative_in_alpha(self):
        dual = DualPoint(lam=np.full(3, 1 / 3), alpha=np.array([0.2, 0.4]))
        moved = DualSubgradientSolver._scaled_step(
            dual, np.full(3, 1.0), np.array([10.0, -10.0]), np.array([5.0, 5.0]), step=0.5
        )
        np.testing.assert_allclose([0.3, 0.2], moved.alpha)
        np.testing.assert_allclose(dual.lam, moved.lam, atol=1e-12)
