"""Dual decomposition for the broadcast (relay power) subproblem.

Per subcarrier the relay minimizes

    f_n(P) = alpha·P - c1·ln(1 + a·P) - c2·ln(1 + b·P),  c_i = (1 - mu)·l_i / ln2

with a = |h~1n|², b = |h~2n|². Its derivative is strictly increasing in P, so the
minimizer is P = 0 when alpha >= c1·a + c2·b and otherwise the positive root of

    alpha·a·b·P² + (alpha·(a + b) - (c1 + c2)·a·b)·P + (alpha - c1·a - c2·b) = 0,

obtained by clearing the denominators of the stationarity condition.
"""

from math import log

import numpy as np

from relay_allocator.dtos import BcSolution, Budgets, ChannelRealization, DualPoint, SolverConfig
from relay_allocator.exceptions import UnboundedInnerProblemError
from relay_allocator.numerics import positive_root_quadratic, positive_root_quadratic_batch
from relay_allocator.rate_model import bc_constraints
from relay_allocator.subgradient import DualSubgradientSolver

LN2 = log(2.0)


def _weights(lam: np.ndarray, mu: float) -> tuple[float, float]:
    return (1.0 - mu) * lam[0] / LN2, (1.0 - mu) * lam[1] / LN2


def _check_bounded(a, b, dual: DualPoint, mu: float) -> None:
    c1, c2 = _weights(dual.lam, mu)
    if dual.alpha[0] <= 0 and np.max(c1 * np.asarray(a) + c2 * np.asarray(b)) > 0:
        raise UnboundedInnerProblemError("alpha = 0 with a positive weighted relay gain")


def inner_gradient_bc(a, b, p, dual: DualPoint, mu: float) -> np.ndarray:
    c1, c2 = _weights(dual.lam, mu)
    return dual.alpha[0] - c1 * a / (1.0 + a * p) - c2 * b / (1.0 + b * p)


def inner_objective_bc(a, b, p, dual: DualPoint, mu: float) -> np.ndarray:
    c1, c2 = _weights(dual.lam, mu)
    return dual.alpha[0] * p - c1 * np.log1p(a * p) - c2 * np.log1p(b * p)


def inner_subcarrier_solve_bc(a_n: float, b_n: float, dual: DualPoint, mu: float) -> float:
    _check_bounded(a_n, b_n, dual, mu)
    c1, c2 = _weights(dual.lam, mu)
    alpha = dual.alpha[0]
    if alpha >= c1 * a_n + c2 * b_n:
        return 0.0
    if b_n == 0:
        return c1 / alpha - 1.0 / a_n
    if a_n == 0:
        return c2 / alpha - 1.0 / b_n
    root = positive_root_quadratic(
        alpha * a_n * b_n,
        alpha * (a_n + b_n) - (c1 + c2) * a_n * b_n,
        alpha - c1 * a_n - c2 * b_n,
    )
    return 0.0 if root is None else root


def inner_solve_all_bc(a: np.ndarray, b: np.ndarray, dual: DualPoint, mu: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_bounded(a, b, dual, mu)
    c1, c2 = _weights(dual.lam, mu)
    alpha = dual.alpha[0]
    powers = np.zeros(a.size)
    on = alpha < c1 * a + c2 * b

    only_a = on & (b == 0)
    powers[only_a] = c1 / alpha - 1.0 / a[only_a]
    only_b = on & (a == 0)
    powers[only_b] = c2 / alpha - 1.0 / b[only_b]

    both = on & (a > 0) & (b > 0)
    if np.any(both):
        x, y = a[both], b[both]
        root = positive_root_quadratic_batch(
            alpha * x * y,
            alpha * (x + y) - (c1 + c2) * x * y,
            alpha - c1 * x - c2 * y,
        )
        powers[both] = np.nan_to_num(root, nan=0.0)
    return np.maximum(powers, 0.0)


def dual_bound_bc(a, b, p, dual: DualPoint, budgets: Budgets) -> float:
    inner = inner_objective_bc(a, b, p, dual, budgets.mu).sum()
    return float(dual.alpha[0] * budgets.pr_max - inner)


class BcSolver(DualSubgradientSolver):
    n_rates = 2

    def solve(self, ch: ChannelRealization, budgets: Budgets) -> BcSolution:
        self._a, self._b, self._mu = ch.gt1, ch.gt2, budgets.mu
        self._budgets = budgets
        pmax = np.array([budgets.pr_max])
        if budgets.pr_max <= 0 or ch.gt1.max() == 0 or ch.gt2.max() == 0:
            return self._silent_solution(ch.n_subcarriers)

        self._log_start(
            f"BC subproblem: N={ch.n_subcarriers} PRmax={budgets.pr_max:g} mu={budgets.mu:g}"
        )
        mean_gain = 0.5 * (ch.gt1.mean() + ch.gt2.mean())
        trace = self._ascend(
            pmax=pmax,
            alpha_init=self._initial_price(ch.gt1, ch.gt2, budgets),
            power_scale=np.array([max(budgets.pr_max, 1.0) + ch.n_subcarriers / mean_gain]),
            n_subcarriers=ch.n_subcarriers,
        )
        self._log_end("R_BC", trace)
        return BcSolution(
            par=trace.powers[0],
            r_bc=trace.rate,
            dual=trace.dual,
            iterations=trace.iterations,
            kkt_residual=trace.kkt_residual,
            dual_gap=trace.dual_gap,
            dual_bound=trace.dual_bound,
            converged=trace.converged,
        )

    def _inner_solve(self, dual: DualPoint) -> tuple[np.ndarray, ...]:
        return (inner_solve_all_bc(self._a, self._b, dual, self._mu),)

    def _constraint_values(self, powers: tuple[np.ndarray, ...]) -> np.ndarray:
        return bc_constraints(self._a, self._b, powers[0], self._mu)

    def _dual_bound(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        return dual_bound_bc(self._a, self._b, powers[0], dual, self._budgets)

    def _kkt_residual(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        gradient = inner_gradient_bc(self._a, self._b, powers[0], dual, self._mu)
        return float(np.abs(np.minimum(powers[0], gradient)).max())

    @staticmethod
    def _initial_price(a, b, budgets: Budgets) -> np.ndarray:
        level = budgets.pr_max / a.size
        marginal = 0.5 * (a / (1.0 + a * level) + b / (1.0 + b * level))
        return np.array([(1.0 - budgets.mu) / LN2 * marginal.mean()])

    @staticmethod
    def _silent_solution(n: int) -> BcSolution:
        return BcSolution(
            par=np.zeros(n),
            r_bc=0.0,
            dual=DualPoint(lam=np.full(2, 0.5), alpha=np.zeros(1)),
            iterations=0,
            kkt_residual=0.0,
        )


def solve_bc(
    ch: ChannelRealization, budgets: Budgets, cfg: SolverConfig | None = None
) -> BcSolution:
    return BcSolver(config=cfg).solve(ch, budgets)
