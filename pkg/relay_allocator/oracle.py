"""Brute-force max-min oracle for small N, used to check the solvers.

Every rate term is nondecreasing in every power, so an optimum spends each
budget completely and only the faces sum(p) = P_max are searched: each power
vector runs over the lattice P_max·k/G with k a composition of G into N parts.

Resolution bound: on [0, P_max] the derivative of w·log2(1 + g·P) is at most
w·g/ln2, and every optimum lies within P_max/G (per coordinate) of a lattice
point on its face. A min of such terms is Lipschitz with the largest of those
constants, so the lattice maximum is below the true maximum by at most
N·(P_max/G)·max(g)/ln2, summed over the power vectors the objective depends on.
The polish closes most of that gap; it can only raise the value.
"""

from abc import ABC, abstractmethod
from itertools import permutations
from math import comb, log

import numpy as np

from relay_allocator.baselines import type2_epigraph, type2_hops, type2_objective
from relay_allocator.config import (
    ORACLE_MAX_EVALUATIONS,
    ORACLE_MAX_N,
    ORACLE_MIN_GRID,
    ORACLE_POLISH_SWEEPS,
)
from relay_allocator.constants import Objective
from relay_allocator.dtos import Budgets, ChannelRealization, OracleResult, PowerAllocation
from relay_allocator.exceptions import OracleSizeError
from relay_allocator.numerics import epigraph_maxmin
from relay_allocator.rate_model import bc_constraints, link_rates, ma_constraints, scale_to_budget

LN2 = log(2.0)
CHUNK_CELLS = 1 << 20


def grid_resolution_bound(ch: ChannelRealization, budgets: Budgets, grid_points: int) -> float:
    """Worst-case lattice shortfall, in bits per block, for any of the objectives."""
    g_max = max(float(g.max()) for g in ch.gains().values())
    p_total = budgets.p1_max + budgets.p2_max + budgets.pr_max
    return ch.n_subcarriers * p_total / grid_points * g_max / LN2


def _lattice(n: int, grid: int) -> np.ndarray:
    """Rows of nonnegative fractions k/grid summing to one."""
    if n == 1:
        return np.ones((1, 1))
    k = np.arange(grid + 1)
    if n == 2:
        return np.column_stack([k, grid - k]) / grid
    rows = [
        np.column_stack([np.full(grid - i + 1, i), j, grid - i - j])
        for i in k
        for j in (np.arange(grid - i + 1),)
    ]
    return np.vstack(rows) / grid


def _effective_grid(n: int, grid: int, n_vectors: int) -> int:
    while grid > 1 and comb(grid + n - 1, n - 1) ** n_vectors > ORACLE_MAX_EVALUATIONS:
        grid //= 2
    return grid


def _chunk_rows(*sizes: int) -> int:
    return max(1, CHUNK_CELLS // int(np.prod(sizes)))


class _Subproblem(ABC):
    """One max-min problem over a tuple of power vectors, each on its own budget face."""

    def __init__(self, ch: ChannelRealization, caps: tuple[float, ...], mu: float):
        self.ch = ch
        self.caps = caps
        self.mu = mu

    @abstractmethod
    def value(self, vectors: list[np.ndarray]) -> float:
        pass

    @abstractmethod
    def search(self, grid: int) -> tuple[list[np.ndarray], float, int]:
        pass

    @abstractmethod
    def epigraph(self, vectors: list[np.ndarray], t: float):
        """Auxiliary start values and the constraint map g(vectors, aux, t) >= 0."""


class _MaProblem(_Subproblem):
    def value(self, vectors):
        return float(ma_constraints(self.ch.g1, self.ch.g2, *vectors, self.mu).min())

    def search(self, grid):
        ch, mu = self.ch, self.mu
        frac = _lattice(ch.n_subcarriers, grid)
        p1s, p2s = frac * self.caps[0], frac * self.caps[1]
        r1 = mu * link_rates(ch.g1, p1s).sum(axis=1)
        r2 = mu * link_rates(ch.g2, p2s).sum(axis=1)
        rows = _chunk_rows(len(p2s), ch.n_subcarriers)
        best, pick = -np.inf, (0, 0)
        for start in range(0, len(p1s), rows):
            block = slice(start, start + rows)
            mixed = (ch.g1 * p1s[block])[:, None, :] + (ch.g2 * p2s)[None, :, :]
            half = 0.5 * mu * np.log2(1.0 + mixed).sum(axis=2)
            values = np.minimum(np.minimum(r1[block, None], r2[None, :]), half)
            i, j = np.unravel_index(np.argmax(values), values.shape)
            if values[i, j] > best:
                best, pick = float(values[i, j]), (start + i, j)
        return [p1s[pick[0]], p2s[pick[1]]], best, len(p1s) * len(p2s)

    def epigraph(self, vectors, t):
        def constraints(vs, aux, t):
            p1, p2 = (np.maximum(v, 0.0) for v in vs)
            return ma_constraints(self.ch.g1, self.ch.g2, p1, p2, self.mu) - t

        return np.empty(0), constraints


class _BcProblem(_Subproblem):
    def value(self, vectors):
        return float(bc_constraints(self.ch.gt1, self.ch.gt2, vectors[0], self.mu).min())

    def search(self, grid):
        ch, mu = self.ch, self.mu
        prs = _lattice(ch.n_subcarriers, grid) * self.caps[0]
        values = (1.0 - mu) * np.minimum(
            link_rates(ch.gt1, prs).sum(axis=1), link_rates(ch.gt2, prs).sum(axis=1)
        )
        best = int(np.argmax(values))
        return [prs[best]], float(values[best]), len(prs)

    def epigraph(self, vectors, t):
        def constraints(vs, aux, t):
            pr = np.maximum(vs[0], 0.0)
            return bc_constraints(self.ch.gt1, self.ch.gt2, pr, self.mu) - t

        return np.empty(0), constraints


class _Type2Problem(_Subproblem):
    def value(self, vectors):
        return type2_objective(self.ch, *vectors, self.mu)

    def search(self, grid):
        ch, mu = self.ch, self.mu
        frac = _lattice(ch.n_subcarriers, grid)
        p1s, p2s, prs = (frac * cap for cap in self.caps)
        up1, down2, up2, down1 = type2_hops(
            ch, p1s[:, None, :], p2s[:, None, :], prs[None, :, :], mu
        )
        r12 = np.minimum(up1, down2).sum(axis=2)
        r21 = np.minimum(up2, down1).sum(axis=2)
        rows = _chunk_rows(len(p2s), len(prs))
        best, pick = -np.inf, (0, 0, 0)
        for start in range(0, len(p1s), rows):
            block = slice(start, start + rows)
            mixed = (ch.g1 * p1s[block])[:, None, :] + (ch.g2 * p2s)[None, :, :]
            half = 0.5 * mu * np.log2(1.0 + mixed).sum(axis=2)
            values = np.minimum(
                np.minimum(half[:, :, None], r12[block][:, None, :]), r21[None, :, :]
            )
            i, j, r = np.unravel_index(np.argmax(values), values.shape)
            if values[i, j, r] > best:
                best, pick = float(values[i, j, r]), (start + i, j, r)
        evaluations = len(p1s) * len(p2s) * len(prs)
        return [p1s[pick[0]], p2s[pick[1]], prs[pick[2]]], best, evaluations

    def epigraph(self, vectors, t):
        return type2_epigraph(self.ch, vectors, self.mu)


def _coordinate_ascent(problem: _Subproblem, vectors, current: float, grid: int):
    vectors = [v.copy() for v in vectors]
    steps = [cap / grid for cap in problem.caps]
    pairs = list(permutations(range(problem.ch.n_subcarriers), 2))
    for _ in range(ORACLE_POLISH_SWEEPS):
        improved = False
        for index, v in enumerate(vectors):
            for n, m in pairs:
                delta = min(steps[index], v[m])
                if delta <= 0:
                    continue
                v[n] += delta
                v[m] -= delta
                trial = problem.value(vectors)
                if trial > current:
                    current, improved = trial, True
                else:
                    v[n] -= delta
                    v[m] += delta
        if not improved:
            steps = [step / 2.0 for step in steps]
    return vectors, current


def _slsqp_polish(problem: _Subproblem, vectors, current: float) -> list[np.ndarray]:
    aux0, constraints = problem.epigraph(vectors, current)
    refined = epigraph_maxmin(problem.caps, vectors, aux0, constraints, current)
    return [scale_to_budget(v, cap) for v, cap in zip(refined, problem.caps)]


def _solve_subproblem(problem: _Subproblem, n_vectors: int, grid_points: int, polish: bool):
    grid = _effective_grid(problem.ch.n_subcarriers, grid_points, n_vectors)
    vectors, value, evaluations = problem.search(grid)
    if polish:
        vectors, value = _coordinate_ascent(problem, vectors, value, grid)
        if max(problem.caps) > 0:
            refined = _slsqp_polish(problem, vectors, value)
            refined_value = problem.value(refined)
            if refined_value > value:
                vectors, value = refined, refined_value
    return vectors, value, evaluations, grid


def grid_maxmin(
    ch: ChannelRealization,
    budgets: Budgets,
    objective: Objective | str,
    grid_points: int,
    polish: bool = True,
) -> OracleResult:
    objective = Objective(objective)
    n = ch.n_subcarriers
    if n > ORACLE_MAX_N:
        raise OracleSizeError(f"the oracle enumerates N <= {ORACLE_MAX_N}, got N={n}")
    if grid_points < ORACLE_MIN_GRID:
        raise OracleSizeError(f"grid_points must be >= {ORACLE_MIN_GRID}, got {grid_points}")

    zero = np.zeros(n)
    mu = budgets.mu
    if objective == Objective.TYPE2:
        problem = _Type2Problem(ch, (budgets.p1_max, budgets.p2_max, budgets.pr_max), mu)
        (p1, p2, pr), rate, evaluations, grid = _solve_subproblem(problem, 3, grid_points, polish)
        allocation = PowerAllocation(p1=p1, p2=p2, pr=pr)
    else:
        rate, evaluations, grid = np.inf, 0, grid_points
        p1 = p2 = pr = zero
        if objective in (Objective.TYPE1, Objective.MA_ONLY):
            problem = _MaProblem(ch, (budgets.p1_max, budgets.p2_max), mu)
            (p1, p2), ma_rate, ma_evals, ma_grid = _solve_subproblem(
                problem, 2, grid_points, polish
            )
            rate, evaluations, grid = min(rate, ma_rate), evaluations + ma_evals, min(grid, ma_grid)
        if objective in (Objective.TYPE1, Objective.BC_ONLY):
            problem = _BcProblem(ch, (budgets.pr_max,), mu)
            (pr,), bc_rate, bc_evals, bc_grid = _solve_subproblem(problem, 1, grid_points, polish)
            rate, evaluations, grid = min(rate, bc_rate), evaluations + bc_evals, min(grid, bc_grid)
        allocation = PowerAllocation(p1=p1, p2=p2, pr=pr)

    return OracleResult(
        rate=float(rate),
        allocation=allocation,
        objective=objective,
        grid_points=grid,
        evaluations=evaluations,
        polished=polish,
    )
