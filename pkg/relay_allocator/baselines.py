"""Per-subcarrier (Type 2) DF baseline: max-min exchange rate by projected supergradient ascent."""

from math import log

import numpy as np

from relay_allocator.config import TYPE2_POLISH_ITERS, TYPE2_STEP_FRACTION
from relay_allocator.dtos import (
    Budgets,
    ChannelRealization,
    PowerAllocation,
    RateSummary,
    SolverConfig,
    Type2Solution,
)
from relay_allocator.exchange_solver import uniform_allocation
from relay_allocator.log import Log
from relay_allocator.numerics import epigraph_maxmin, project_capped_simplex
from relay_allocator.rate_model import link_rates, scale_to_budget, type2_directional, type2_rates

LN2 = log(2.0)


def type2_objective(ch: ChannelRealization, p1, p2, pr, mu: float) -> float:
    r_12, r_21 = type2_directional(ch, p1, p2, pr, mu)
    half_sum = 0.5 * mu * np.log2(1.0 + ch.g1 * p1 + ch.g2 * p2).sum()
    return float(min(half_sum, r_12, r_21))


def type2_hops(ch: ChannelRealization, p1, p2, pr, mu: float):
    """Per-subcarrier hop rates (up 1, down to 2, up 2, down to 1); broadcasts over leading axes."""
    return (
        mu * link_rates(ch.g1, p1),
        (1.0 - mu) * link_rates(ch.gt2, pr),
        mu * link_rates(ch.g2, p2),
        (1.0 - mu) * link_rates(ch.gt1, pr),
    )


def type2_epigraph(ch: ChannelRealization, vectors, mu: float):
    """Auxiliary per-subcarrier directional rates and the epigraph constraint map."""
    n = ch.n_subcarriers
    up1, down2, up2, down1 = type2_hops(ch, *vectors, mu)
    aux0 = np.concatenate([np.minimum(up1, down2), np.minimum(up2, down1)])

    def constraints(vs, aux, t):
        p1, p2, pr = (np.maximum(v, 0.0) for v in vs)
        u, w = aux[:n], aux[n:]
        up1, down2, up2, down1 = type2_hops(ch, p1, p2, pr, mu)
        half = 0.5 * mu * np.log2(1.0 + ch.g1 * p1 + ch.g2 * p2).sum()
        return np.concatenate(
            [up1 - u, down2 - u, up2 - w, down1 - w, [u.sum() - t, w.sum() - t, half - t]]
        )

    return aux0, constraints


def type2_supergradient(
    ch: ChannelRealization, p1, p2, pr, mu: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradient of one minimal term; ties go to the sum-rate term, then direction 1->2."""
    up1, down2, up2, down1 = type2_hops(ch, p1, p2, pr, mu)
    terms = np.array(
        [
            0.5 * mu * np.log2(1.0 + ch.g1 * p1 + ch.g2 * p2).sum(),
            np.minimum(up1, down2).sum(),
            np.minimum(up2, down1).sum(),
        ]
    )
    grad1, grad2, grad_r = np.zeros_like(p1), np.zeros_like(p2), np.zeros_like(pr)
    active = int(np.argmin(terms))
    if active == 0:
        shared = 0.5 * mu / (LN2 * (1.0 + ch.g1 * p1 + ch.g2 * p2))
        grad1, grad2 = shared * ch.g1, shared * ch.g2
    elif active == 1:
        uplink = up1 <= down2
        grad1 = np.where(uplink, mu * ch.g1 / (LN2 * (1.0 + ch.g1 * p1)), 0.0)
        grad_r = np.where(uplink, 0.0, (1.0 - mu) * ch.gt2 / (LN2 * (1.0 + ch.gt2 * pr)))
    else:
        uplink = up2 <= down1
        grad2 = np.where(uplink, mu * ch.g2 / (LN2 * (1.0 + ch.g2 * p2)), 0.0)
        grad_r = np.where(uplink, 0.0, (1.0 - mu) * ch.gt1 / (LN2 * (1.0 + ch.gt1 * pr)))
    return grad1, grad2, grad_r


class Type2Solver:
    def __init__(self, config: SolverConfig | None = None, logger: Log | None = None):
        self._config = config or SolverConfig()
        self._logger = logger

    def solve(self, ch: ChannelRealization, budgets: Budgets) -> Type2Solution:
        cfg, mu = self._config, budgets.mu
        start = uniform_allocation(ch, budgets)
        p1, p2, pr = start.p1.copy(), start.p2.copy(), start.pr.copy()
        caps = (budgets.p1_max, budgets.p2_max, budgets.pr_max)
        length = TYPE2_STEP_FRACTION * max(caps)
        best_value = type2_objective(ch, p1, p2, pr, mu)
        best = (p1, p2, pr)
        patience = max(cfg.min_iters, int(cfg.averaging_fraction * cfg.max_iters))
        last_gain, converged = 0, False

        if length > 0:
            self._log_start(ch, budgets)
        k = 0
        for k in range(1, cfg.max_iters + 1):
            if length == 0:
                converged = True
                break
            grads = type2_supergradient(ch, p1, p2, pr, mu)
            norm = np.sqrt(sum(float(g @ g) for g in grads))
            if norm == 0:
                converged = True
                break
            scale = length * cfg.step(k) / norm
            p1, p2, pr = (
                project_capped_simplex(p + scale * g, cap)
                for p, g, cap in zip((p1, p2, pr), grads, caps)
            )
            value = type2_objective(ch, p1, p2, pr, mu)
            if value > best_value * (1.0 + cfg.epsilon) + cfg.epsilon:
                last_gain = k
            if value > best_value:
                best_value, best = value, (p1, p2, pr)
            if k - last_gain >= patience:
                converged = True
                break

        if min(caps) > 0 and TYPE2_POLISH_ITERS > 0:
            best, best_value = self._polish(ch, best, best_value, caps, mu)
        allocation = PowerAllocation(*best)
        rates = type2_rates(ch, allocation, budgets)
        if self._logger is not None and length > 0:
            status = "converged" if converged else "iteration cap reached"
            self._logger.log(f"{status} after {k} iterations")
            self._logger.log_rates("type2-opt", rates)
        return Type2Solution(allocation=allocation, rates=rates, iterations=k, converged=converged)

    @staticmethod
    def _polish(ch, best, best_value, caps, mu):
        """Local epigraph solve from the best iterate; kept only if it raises the rate."""
        aux0, constraints = type2_epigraph(ch, best, mu)
        refined = epigraph_maxmin(
            caps, list(best), aux0, constraints, best_value, max_iters=TYPE2_POLISH_ITERS
        )
        refined = tuple(scale_to_budget(v, cap) for v, cap in zip(refined, caps))
        value = type2_objective(ch, *refined, mu)
        if value > best_value:
            return refined, value
        return best, best_value

    def _log_start(self, ch: ChannelRealization, budgets: Budgets) -> None:
        if self._logger is not None:
            self._logger.log_title(
                f"Type 2 max-min: N={ch.n_subcarriers} budgets="
                f"{budgets.p1_max:g}/{budgets.p2_max:g}/{budgets.pr_max:g}"
            )


def solve_type2(
    ch: ChannelRealization, budgets: Budgets, cfg: SolverConfig | None = None
) -> tuple[PowerAllocation, RateSummary]:
    solution = Type2Solver(config=cfg).solve(ch, budgets)
    return solution.allocation, solution.rates
