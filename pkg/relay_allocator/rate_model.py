import numpy as np

from relay_allocator.config import FEASIBILITY_TOL
from relay_allocator.dtos import Budgets, ChannelRealization, PowerAllocation, RateSummary
from relay_allocator.exceptions import DimensionError, NegativePowerError


def _validate(ch: ChannelRealization, pa: PowerAllocation) -> None:
    if pa.n_subcarriers != ch.n_subcarriers:
        raise DimensionError(
            f"allocation has {pa.n_subcarriers} subcarriers, channel has {ch.n_subcarriers}"
        )
    for name in ("p1", "p2", "pr"):
        if np.any(getattr(pa, name) < 0):
            raise NegativePowerError(f"{name} has negative entries")


def link_rates(gains: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """Per-subcarrier log2(1 + g·P)."""
    return np.log2(1.0 + gains * powers)


def ma_constraints(
    g1: np.ndarray, g2: np.ndarray, p1: np.ndarray, p2: np.ndarray, mu: float
) -> np.ndarray:
    """[C_MA1, C_MA2, C_MA3]: the two individual limits and the halved sum-rate limit."""
    return np.array(
        [
            mu * link_rates(g1, p1).sum(),
            mu * link_rates(g2, p2).sum(),
            0.5 * mu * np.log2(1.0 + g1 * p1 + g2 * p2).sum(),
        ]
    )


def bc_constraints(gt1: np.ndarray, gt2: np.ndarray, pr: np.ndarray, mu: float) -> np.ndarray:
    return np.array(
        [
            (1.0 - mu) * link_rates(gt1, pr).sum(),
            (1.0 - mu) * link_rates(gt2, pr).sum(),
        ]
    )


def type1_rates(
    ch: ChannelRealization, pa: PowerAllocation, budgets: Budgets
) -> RateSummary:
    _validate(ch, pa)
    mu = budgets.mu
    c_ma_1, c_ma_2, half_sum = ma_constraints(ch.g1, ch.g2, pa.p1, pa.p2, mu)
    c_bc_1, c_bc_2 = bc_constraints(ch.gt1, ch.gt2, pa.pr, mu)
    return RateSummary(
        c_ma_1=float(c_ma_1),
        c_ma_2=float(c_ma_2),
        c_ma_sum=float(2.0 * half_sum),
        c_bc_1=float(c_bc_1),
        c_bc_2=float(c_bc_2),
        r_exchange=float(min(c_ma_1, c_ma_2, half_sum, c_bc_1, c_bc_2)),
        r_12=float(min(c_ma_1, c_bc_2)),
        r_21=float(min(c_ma_2, c_bc_1)),
        scheme="type1",
    )


def type2_directional(
    ch: ChannelRealization, p1: np.ndarray, p2: np.ndarray, pr: np.ndarray, mu: float
) -> tuple[float, float]:
    """Per-subcarrier DF: each hop pair is limited subcarrier by subcarrier."""
    r_12 = np.minimum(mu * link_rates(ch.g1, p1), (1.0 - mu) * link_rates(ch.gt2, pr))
    r_21 = np.minimum(mu * link_rates(ch.g2, p2), (1.0 - mu) * link_rates(ch.gt1, pr))
    return float(r_12.sum()), float(r_21.sum())


def type2_rates(
    ch: ChannelRealization, pa: PowerAllocation, budgets: Budgets
) -> RateSummary:
    type1 = type1_rates(ch, pa, budgets)
    r_12, r_21 = type2_directional(ch, pa.p1, pa.p2, pa.pr, budgets.mu)
    return RateSummary(
        c_ma_1=type1.c_ma_1,
        c_ma_2=type1.c_ma_2,
        c_ma_sum=type1.c_ma_sum,
        c_bc_1=type1.c_bc_1,
        c_bc_2=type1.c_bc_2,
        r_exchange=min(r_12, r_21, type1.c_ma_sum / 2.0),
        r_12=r_12,
        r_21=r_21,
        scheme="type2",
    )


def check_feasible(
    pa: PowerAllocation, budgets: Budgets, tol: float = FEASIBILITY_TOL
) -> bool:
    pairs = ((pa.p1, budgets.p1_max), (pa.p2, budgets.p2_max), (pa.pr, budgets.pr_max))
    return all(
        bool(np.all(powers >= -tol)) and powers.sum() <= budget * (1.0 + tol)
        for powers, budget in pairs
    )


def scale_to_budget(powers: np.ndarray, budget: float) -> np.ndarray:
    """Clamp at zero and scale down onto the budget when the sum exceeds it."""
    powers = np.maximum(powers, 0.0)
    total = powers.sum()
    if total > budget:
        return powers * (budget / total) if total > 0 else powers
    return powers
