from concurrent.futures import ThreadPoolExecutor

import numpy as np

from relay_allocator.bc_solver import BcSolver
from relay_allocator.dtos import (
    Budgets,
    ChannelRealization,
    ExchangeResult,
    PowerAllocation,
    RateSummary,
    SolverConfig,
)
from relay_allocator.exceptions import InconsistentRatesError
from relay_allocator.log import Log
from relay_allocator.ma_solver import MaSolver
from relay_allocator.rate_model import type1_rates

CONSISTENCY_TOL = 1e-6


class ExchangeSolver:
    """Maximizes the exchange rate as min(R_MA*, R_BC*): terminal and relay powers decouple."""

    def __init__(
        self,
        config: SolverConfig | None = None,
        logger: Log | None = None,
        concurrent: bool = False,
    ):
        self._config = config or SolverConfig()
        self._logger = logger
        self._concurrent = concurrent

    def solve(self, ch: ChannelRealization, budgets: Budgets) -> ExchangeResult:
        ma_solver = MaSolver(config=self._config, logger=self._logger)
        bc_solver = BcSolver(config=self._config, logger=self._logger)
        if self._concurrent:
            with ThreadPoolExecutor(max_workers=2) as pool:
                ma_future = pool.submit(ma_solver.solve, ch, budgets)
                bc_future = pool.submit(bc_solver.solve, ch, budgets)
                ma, bc = ma_future.result(), bc_future.result()
        else:
            ma, bc = ma_solver.solve(ch, budgets), bc_solver.solve(ch, budgets)

        allocation = PowerAllocation(p1=ma.pa1, p2=ma.pa2, pr=bc.par)
        rates = type1_rates(ch, allocation, budgets)
        expected = min(ma.r_ma, bc.r_bc)
        if abs(rates.r_exchange - expected) > CONSISTENCY_TOL:
            raise InconsistentRatesError(
                f"combined allocation gives R_X={rates.r_exchange:.9f}, "
                f"subproblems give {expected:.9f}"
            )
        if self._logger is not None:
            self._logger.log_rates("type1-opt", rates)
        return ExchangeResult(
            allocation=allocation,
            rates=rates,
            ma=ma,
            bc=bc,
            converged=ma.converged and bc.converged,
        )


def uniform_allocation(ch: ChannelRealization, budgets: Budgets) -> PowerAllocation:
    n = ch.n_subcarriers
    return PowerAllocation(
        p1=np.full(n, budgets.p1_max / n),
        p2=np.full(n, budgets.p2_max / n),
        pr=np.full(n, budgets.pr_max / n),
    )


def solve_exchange(
    ch: ChannelRealization, budgets: Budgets, cfg: SolverConfig | None = None
) -> tuple[PowerAllocation, RateSummary]:
    result = ExchangeSolver(config=cfg).solve(ch, budgets)
    return result.allocation, result.rates


def solve_uniform(
    ch: ChannelRealization, budgets: Budgets
) -> tuple[PowerAllocation, RateSummary]:
    allocation = uniform_allocation(ch, budgets)
    return allocation, type1_rates(ch, allocation, budgets)
