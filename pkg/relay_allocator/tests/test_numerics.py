import unittest

import numpy as np
from scipy.optimize import brentq

from relay_allocator.exceptions import (
    BudgetError,
    DegenerateQuadraticError,
    EmptyInputError,
    NonFiniteError,
)
from relay_allocator.numerics import (
    polyval_cubic,
    positive_root_quadratic,
    positive_root_quadratic_batch,
    project_capped_simplex,
    project_nonneg,
    project_simplex,
    real_roots_cubic,
    real_roots_cubic_batch,
    real_roots_quadratic,
    water_filling,
)


def bracketed_roots(coeffs, lo=-60.0, hi=60.0, points=24001) -> list[float]:
    """Roots found by brentq on every sign change of a fine grid."""
    grid = np.linspace(lo, hi, points)
    values = polyval_cubic(*coeffs, grid)
    roots = []
    for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        root = brentq(lambda x: polyval_cubic(*coeffs, x), grid[i], grid[i + 1], xtol=1e-14)
        roots.append(root)
    roots += [float(x) for x in grid[values == 0]]
    return sorted(roots)


class TestRealRootsCubic(unittest.TestCase):
    def test_three_distinct_roots(self):
        roots = real_roots_cubic(1.0, -6.0, 11.0, -6.0)
        np.testing.assert_allclose([1.0, 2.0, 3.0], roots, atol=1e-12)

    def test_single_real_root(self):
        np.testing.assert_allclose([-1.0], real_roots_cubic(1.0, 0.0, 0.0, 1.0), atol=1e-12)

    def test_triple_root(self):
        r = 1.7
        roots = real_roots_cubic(1.0, -3.0 * r, 3.0 * r * r, -(r ** 3))
        self.assertGreaterEqual(len(roots), 1)
        for root in roots:
            self.assertAlmostEqual(r, root, delta=1e-4)

    def test_double_root(self):
        roots = real_roots_cubic(1.0, -4.0, 5.0, -2.0)  # (x - 1)^2 (x - 2)
        self.assertAlmostEqual(2.0, roots[-1], places=9)
        for root in roots[:-1]:
            self.assertAlmostEqual(1.0, root, delta=1e-6)

    def test_leading_zero_falls_back_to_quadratic(self):
        np.testing.assert_allclose([-1.0, 1.0], real_roots_cubic(0.0, 1.0, 0.0, -1.0))

    def test_non_finite(self):
        with self.assertRaises(NonFiniteError):
            real_roots_cubic(1.0, np.nan, 0.0, 0.0)

    def test_residual_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            coeffs = rng.uniform(-5.0, 5.0, size=4)
            for root in real_roots_cubic(*coeffs):
                bound = 1e-8 * max(1.0, abs(coeffs[0]) * abs(root) ** 3)
                self.assertLessEqual(abs(polyval_cubic(*coeffs, root)), bound)

    def test_matches_bracketing_oracle(self):
        rng = np.random.default_rng(4)
        checked = 0
        while checked < 1000:
            coeffs = rng.uniform(-5.0, 5.0, size=4)
            if abs(coeffs[0]) < 0.1:
                continue
            roots = real_roots_cubic(*coeffs)
            expected = bracketed_roots(coeffs)
            if len(expected) != len(roots):
                # a near double root without a sign change on the grid
                continue
            np.testing.assert_allclose(expected, roots, atol=1e-7)
            checked += 1

    def test_batch_agrees_with_scalar(self):
        rng = np.random.default_rng(5)
        coeffs = rng.uniform(-3.0, 3.0, size=(4, 50))
        coeffs[0] = np.where(np.abs(coeffs[0]) < 0.1, 1.0, coeffs[0])
        batch = real_roots_cubic_batch(*coeffs)
        for row, column in zip(batch, coeffs.T):
            largest = np.max(row[np.isfinite(row)])
            self.assertAlmostEqual(real_roots_cubic(*column)[-1], largest, delta=1e-9)


class TestQuadratic(unittest.TestCase):
    def test_unit_roots(self):
        self.assertEqual(1.0, positive_root_quadratic(1.0, 0.0, -1.0))

    def test_no_real_root(self):
        self.assertIsNone(positive_root_quadratic(1.0, 0.0, 1.0))

    def test_no_positive_root(self):
        self.assertIsNone(positive_root_quadratic(1.0, 3.0, 2.0))

    def test_cancellation_safe_small_root(self):
        small, large = real_roots_quadratic(1.0, -1e8, 1.0)
        self.assertAlmostEqual(1e-8, small, delta=1e-14)
        self.assertAlmostEqual(1e8, large, delta=1e-6)

    def test_largest_positive_root(self):
        self.assertAlmostEqual(1e8, positive_root_quadratic(1.0, -1e8, 1.0), delta=1e-6)

    def test_linear_fallback(self):
        self.assertEqual([2.0], real_roots_quadratic(0.0, 2.0, -4.0))

    def test_degenerate(self):
        with self.assertRaises(DegenerateQuadraticError):
            real_roots_quadratic(0.0, 0.0, 1.0)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(6)
        a2 = rng.uniform(0.1, 2.0, 200)
        a1 = rng.uniform(-3.0, 3.0, 200)
        a0 = rng.uniform(-3.0, 3.0, 200)
        batch = positive_root_quadratic_batch(a2, a1, a0)
        for value, coeffs in zip(batch, zip(a2, a1, a0)):
            expected = positive_root_quadratic(*coeffs)
            if expected is None:
                self.assertTrue(np.isnan(value))
            else:
                self.assertAlmostEqual(expected, value, places=12)


class TestProjectSimplex(unittest.TestCase):
    def test_symmetric_point(self):
        np.testing.assert_allclose([1 / 3] * 3, project_simplex([0.5, 0.5, 0.5]), atol=1e-12)

    def test_vertex_is_fixed(self):
        np.testing.assert_allclose([1.0, 0.0, 0.0], project_simplex([1.0, 0.0, 0.0]))

    def test_threshold_example(self):
        np.testing.assert_allclose([0.7, 0.3, 0.0], project_simplex([0.8, 0.4, -0.2]), atol=1e-12)

    def test_scaled_simplex(self):
        w = project_simplex([3.0, 1.0, 0.0], radius=2.0)
        np.testing.assert_allclose([2.0, 0.0, 0.0], w, atol=1e-12)

    def test_empty(self):
        with self.assertRaises(EmptyInputError):
            project_simplex([])

    def test_non_finite(self):
        with self.assertRaises(NonFiniteError):
            project_simplex([1.0, np.inf])

    def test_zero_radius_gives_zeros(self):
        for method in ("michelot", "sort"):
            w = project_simplex([0.2, -1.0, 3.0], radius=0.0, method=method)
            np.testing.assert_array_equal(np.zeros(3), w)

    def test_negative_radius(self):
        with self.assertRaises(BudgetError):
            project_simplex([1.0, 2.0], radius=-1.0)

    def test_michelot_agrees_with_sort(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            v = rng.normal(scale=2.0, size=rng.integers(1, 12))
            np.testing.assert_allclose(
                project_simplex(v, method="sort"), project_simplex(v), atol=1e-12
            )

    def test_variational_characterization(self):
        rng = np.random.default_rng(8)
        for _ in range(10000):
            v = rng.normal(size=4)
            w = project_simplex(v)
            self.assertAlmostEqual(1.0, w.sum(), delta=1e-12)
            self.assertGreaterEqual(w.min(), 0.0)
            others = rng.dirichlet(np.ones(4), size=100)
            distances = np.linalg.norm(others - v, axis=1)
            self.assertLessEqual(np.linalg.norm(w - v), distances.min() + 1e-9)


class TestProjectNonneg(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_array_equal([0.0, 2.0], project_nonneg([-1.0, 2.0]))
        np.testing.assert_array_equal([0.0, 0.0], project_nonneg([0.0, 0.0]))

    def test_is_nearest_point(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            v = rng.normal(size=5)
            w = project_nonneg(v)
            u = np.abs(rng.normal(size=5))
            self.assertLessEqual(np.linalg.norm(w - v), np.linalg.norm(u - v) + 1e-12)


class TestProjectCappedSimplex(unittest.TestCase):
    def test_inside_is_clipped_only(self):
        np.testing.assert_allclose([0.0, 1.0], project_capped_simplex([-1.0, 1.0], 4.0))

    def test_outside_lands_on_face(self):
        w = project_capped_simplex([5.0, 3.0], 4.0)
        np.testing.assert_allclose([3.0, 1.0], w)

    def test_zero_budget_gives_zeros(self):
        w = project_capped_simplex([5.0, 3.0, -1.0], 0.0)
        np.testing.assert_array_equal(np.zeros(3), w)
        self.assertTrue(np.all(np.isfinite(w)))


class TestWaterFilling(unittest.TestCase):
    def test_equal_gains_split_evenly(self):
        powers, level = water_filling(np.ones(4), 8.0)
        np.testing.assert_allclose([2.0] * 4, powers)
        self.assertAlmostEqual(3.0, level)

    def test_weak_subcarrier_stays_dry(self):
        powers, level = water_filling(np.array([1.0, 0.01]), 1.0)
        np.testing.assert_allclose([1.0, 0.0], powers)
        self.assertAlmostEqual(2.0, level)

    def test_budget_is_spent(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            gains = rng.exponential(size=16)
            powers, level = water_filling(gains, 5.0)
            self.assertAlmostEqual(5.0, powers.sum(), places=10)
            active = powers > 0
            np.testing.assert_allclose(level - 1.0 / gains[active], powers[active])
            self.assertTrue(np.all(level <= 1.0 / gains[~active] + 1e-12))

    def test_zero_budget(self):
        powers, _ = water_filling(np.ones(3), 0.0)
        np.testing.assert_array_equal(np.zeros(3), powers)
