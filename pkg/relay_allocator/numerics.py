"""Numeric kernels: closed-form polynomial roots, simplex projections, water-filling
and a local epigraph solve for max-min polishing."""

import numpy as np
from scipy.optimize import minimize

from relay_allocator.config import ROOT_MERGE_TOL
from relay_allocator.exceptions import (
    BudgetError,
    DegenerateQuadraticError,
    EmptyInputError,
    NonFiniteError,
)


def _require_finite(*values) -> None:
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise NonFiniteError(f"coefficients must be finite, got {values}")


def polyval_cubic(a3, a2, a1, a0, x):
    return ((a3 * x + a2) * x + a1) * x + a0


def _newton_polish(a3, a2, a1, a0, x: np.ndarray, steps: int = 2) -> np.ndarray:
    """Newton refinement that only keeps steps which shrink |p(x)|."""
    for _ in range(steps):
        value = polyval_cubic(a3, a2, a1, a0, x)
        slope = (3.0 * a3 * x + 2.0 * a2) * x + a1
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = np.where(slope != 0, x - value / slope, x)
        better = np.abs(polyval_cubic(a3, a2, a1, a0, candidate)) < np.abs(value)
        x = np.where(np.isfinite(candidate) & better, candidate, x)
    return x


def real_roots_cubic_batch(a3, a2, a1, a0) -> np.ndarray:
    """Real roots of many cubics a3·x³ + a2·x² + a1·x + a0 (a3 != 0).

    Returns an (n, 3) array; rows with a single real root carry NaN in the last
    two columns. Cardano on the depressed cubic t³ + p·t + q, with the
    trigonometric form when all three roots are real.
    """
    a3, a2, a1, a0 = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (a3, a2, a1, a0)))
    a3, a2, a1, a0 = (np.atleast_1d(c).ravel() for c in (a3, a2, a1, a0))
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    roots = np.full((a3.size, 3), np.nan)
    one = disc > 0
    if np.any(one):
        sq = np.sqrt(disc[one])
        qo, po = q[one], p[one]
        w = np.cbrt(np.where(qo >= 0, -qo / 2.0 - sq, -qo / 2.0 + sq))
        roots[one, 0] = w - po / (3.0 * w)

    three = ~one
    triple = three & (p == 0)
    roots[triple, 0] = 0.0
    trig = three & (p != 0)
    if np.any(trig):
        pt, qt = p[trig], q[trig]
        radius = 2.0 * np.sqrt(-pt / 3.0)
        cos_arg = np.clip(3.0 * qt / (2.0 * pt) * np.sqrt(-3.0 / pt), -1.0, 1.0)
        theta = np.arccos(cos_arg) / 3.0
        for k in range(3):
            roots[trig, k] = radius * np.cos(theta - 2.0 * np.pi * k / 3.0)

    roots = roots - shift[:, None]
    coeffs = (a3[:, None], a2[:, None], a1[:, None], a0[:, None])
    return _newton_polish(*coeffs, roots)


def _merge_close(roots: list[float]) -> list[float]:
    merged: list[float] = []
    for root in sorted(roots):
        if merged and abs(root - merged[-1]) <= ROOT_MERGE_TOL * max(1.0, abs(root)):
            continue
        merged.append(root)
    return merged


def real_roots_quadratic(a2: float, a1: float, a0: float) -> list[float]:
    """All real roots, ascending, using the cancellation-free quadratic formula."""
    _require_finite(a2, a1, a0)
    if a2 == 0:
        if a1 == 0:
            raise DegenerateQuadraticError("a2 = a1 = 0: no equation to solve")
        return [-a0 / a1]
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0:
        return []
    q = -0.5 * (a1 + np.copysign(np.sqrt(disc), a1))
    if q == 0:
        return [0.0]
    return _merge_close([q / a2, a0 / q])


def positive_root_quadratic(a2: float, a1: float, a0: float) -> float | None:
    positive = [root for root in real_roots_quadratic(a2, a1, a0) if root > 0]
    return max(positive) if positive else None


def real_roots_cubic(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """Real roots of a cubic, ascending and deduplicated; a3 = 0 falls back to the quadratic."""
    _require_finite(a3, a2, a1, a0)
    if a3 == 0:
        return real_roots_quadratic(a2, a1, a0)
    row = real_roots_cubic_batch(a3, a2, a1, a0)[0]
    return _merge_close([float(root) for root in row if np.isfinite(root)])


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInputError("cannot project an empty vector")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("projection input must be finite")
    return v


def project_simplex(v, radius: float = 1.0, method: str = "michelot") -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum(w) = radius}."""
    v = _as_vector(v)
    if radius < 0:
        raise BudgetError(f"simplex radius must be nonnegative, got {radius}")
    if radius == 0:
        return np.zeros(v.size)
    if method == "sort":
        return _simplex_sort(v, radius)
    return _simplex_michelot(v, radius)


def _simplex_michelot(v: np.ndarray, radius: float) -> np.ndarray:
    active = np.ones(v.size, dtype=bool)
    while True:
        tau = (v[active].sum() - radius) / active.sum()
        still = active & (v - tau > 0)
        if not still.any():
            return np.zeros(v.size)
        if still.sum() == active.sum():
            break
        active = still
    return np.maximum(v - tau, 0.0)


def _simplex_sort(v: np.ndarray, radius: float) -> np.ndarray:
    u = np.sort(v)[::-1]
    thresholds = (np.cumsum(u) - radius) / np.arange(1, v.size + 1)
    positive = np.nonzero(u - thresholds > 0)[0]
    if positive.size == 0:
        return np.zeros(v.size)
    k = positive[-1]
    return np.maximum(v - thresholds[k], 0.0)


def project_nonneg(v) -> np.ndarray:
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def project_capped_simplex(v, budget: float) -> np.ndarray:
    """Projection onto {p >= 0, sum(p) <= budget}."""
    clipped = project_nonneg(_as_vector(v))
    if budget <= 0:
        return np.zeros(clipped.size)
    if clipped.sum() <= budget:
        return clipped
    return project_simplex(v, radius=budget)


def water_filling(gains, budget: float) -> tuple[np.ndarray, float]:
    """Single-user water-filling: P_n = max(level - 1/g_n, 0) with sum(P) = budget."""
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros(gains.size)
    usable = np.nonzero(gains > 0)[0]
    if usable.size == 0 or budget <= 0:
        level = float(1.0 / gains.max()) if usable.size else 0.0
        return powers, level

    order = usable[np.argsort(gains[usable])[::-1]]
    floors = 1.0 / gains[order]
    levels = (budget + np.cumsum(floors)) / np.arange(1, order.size + 1)
    n_active = int(np.nonzero(levels > floors)[0][-1]) + 1
    level = float(levels[n_active - 1])
    active = order[:n_active]
    powers[active] = level - 1.0 / gains[active]
    return powers, level


def positive_root_quadratic_batch(a2, a1, a0) -> np.ndarray:
    """Largest positive root per row (a2 > 0), NaN where there is none."""
    a2, a1, a0 = (np.asarray(c, dtype=float) for c in (a2, a1, a0))
    disc = a1 * a1 - 4.0 * a2 * a0
    sq = np.sqrt(np.maximum(disc, 0.0))
    q = -0.5 * (a1 + np.copysign(sq, a1))
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = np.stack([q / a2, np.where(q != 0, a0 / q, 0.0)])
    best = np.max(np.where((roots > 0) & (disc >= 0), roots, -np.inf), axis=0)
    return np.where(np.isfinite(best), best, np.nan)


def epigraph_maxmin(caps, vectors, aux0, constraints, t0: float, max_iters: int = 500):
    """Local SLSQP solve of max t s.t. constraints(vectors, aux, t) >= 0, sum(v) <= cap.

    Returns the power vectors only, unscaled; callers re-check feasibility.
    """
    n, k = vectors[0].size, len(vectors)
    x0 = np.concatenate([*vectors, aux0, [t0]])

    def split(x):
        return [x[i * n:(i + 1) * n] for i in range(k)], x[k * n:-1], x[-1]

    def budget_slack(x):
        vs, _, _ = split(x)
        return np.array([cap - v.sum() for v, cap in zip(vs, caps)])

    objective_grad = np.zeros(x0.size)
    objective_grad[-1] = -1.0
    bounds = [(0.0, cap) for cap in caps for _ in range(n)]
    bounds += [(None, None)] * (aux0.size + 1)
    result = minimize(
        lambda x: -x[-1],
        x0,
        jac=lambda x: objective_grad,
        method="SLSQP",
        bounds=bounds,
        constraints=[
            {"type": "ineq", "fun": lambda x: constraints(*split(x))},
            {"type": "ineq", "fun": budget_slack},
        ],
        options={"maxiter": max_iters, "ftol": 1e-14},
    )
    vs, _, _ = split(result.x)
    return [np.maximum(v, 0.0) for v in vs]
