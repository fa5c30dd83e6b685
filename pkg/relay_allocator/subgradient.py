"""Projected subgradient ascent shared by the MA and BC dual decompositions.

The dual point nu = (lam, alpha): lam weights the rate constraints and lives on
the probability simplex, alpha prices the power budgets and stays nonnegative.
Each iteration minimizes the Lagrangian per subcarrier (subclass hook) and moves
along eta = (-C, sum P - Pmax):

    lam   <- proj_simplex(lam - s_k · C)
    alpha <- max(alpha + s_k · (sum P - Pmax), 0)

with s_k = step0 / max(1, Pmax) / sqrt(k) (or / k). DualUpdate.SCALED swaps in
a diagonally scaled variant that makes both blocks dimensionless:

    lam   <- proj_simplex(lam - s_k · C / sum(C))
    alpha <- max(alpha + s_k · alpha · clip((sum P - Pmax) / scale, -1, 1), 0)
"""

from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from math import ceil

import numpy as np

from relay_allocator.constants import DualUpdate
from relay_allocator.dtos import DualPoint, SolverConfig
from relay_allocator.log import Log
from relay_allocator.numerics import project_nonneg, project_simplex
from relay_allocator.rate_model import scale_to_budget


@dataclass
class AscentTrace:
    powers: tuple[np.ndarray, ...]
    rate: float
    dual: DualPoint
    iterations: int
    kkt_residual: float
    dual_bound: float
    converged: bool

    @property
    def dual_gap(self) -> float:
        return self.dual_bound - self.rate


class DualSubgradientSolver(ABC):
    n_rates: int = 0

    def __init__(self, config: SolverConfig | None = None, logger: Log | None = None):
        self._config = config or SolverConfig()
        self._logger = logger

    @abstractmethod
    def _inner_solve(self, dual: DualPoint) -> tuple[np.ndarray, ...]:
        """Per-subcarrier Lagrangian minimizer, one power vector per budget."""

    @abstractmethod
    def _constraint_values(self, powers: tuple[np.ndarray, ...]) -> np.ndarray:
        """Right-hand sides of the rate constraints (bits per block)."""

    @abstractmethod
    def _dual_bound(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        """Dual function value at the inner minimizer, as an upper bound on the rate."""

    @abstractmethod
    def _kkt_residual(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        pass

    def _ascend(
        self,
        pmax: np.ndarray,
        alpha_init: np.ndarray,
        power_scale: np.ndarray,
        n_subcarriers: int,
    ) -> AscentTrace:
        cfg = self._config
        scaled = cfg.dual_update == DualUpdate.SCALED
        step_scale = 1.0 if scaled else 1.0 / max(1.0, float(pmax.max()))
        dual = DualPoint(lam=np.full(self.n_rates, 1.0 / self.n_rates), alpha=alpha_init.copy())
        window = deque(maxlen=max(1, ceil(cfg.averaging_fraction * cfg.max_iters)))
        uniform = tuple(np.full(n_subcarriers, budget / n_subcarriers) for budget in pmax)
        best_rate, best_powers = self._recover(uniform, pmax)
        best_bound = np.inf
        converged = False

        k = 0
        for k in range(1, cfg.max_iters + 1):
            dual.alpha = np.maximum(dual.alpha, cfg.alpha_floor)
            powers = self._inner_solve(dual)
            best_bound = min(best_bound, self._dual_bound(powers, dual))
            window.append(powers)
            rate, feasible = self._recover(powers, pmax)
            if rate > best_rate:
                best_rate, best_powers = rate, feasible

            residual = np.array([p.sum() for p in powers]) - pmax
            constraints = self._constraint_values(powers)
            step = cfg.step(k) * step_scale
            if scaled:
                previous = self._normalized(dual, alpha_init)
                dual = self._scaled_step(dual, constraints, residual, power_scale, step)
                current = self._normalized(dual, alpha_init)
            else:
                previous = dual.as_vector()
                dual = self._step(dual, constraints, residual, step)
                current = dual.as_vector()
            if k >= cfg.min_iters and (
                np.linalg.norm(current - previous) <= cfg.epsilon * np.linalg.norm(previous)
            ):
                converged = True
                break

        dual.alpha = np.maximum(dual.alpha, cfg.alpha_floor)
        final = self._inner_solve(dual)
        best_bound = min(best_bound, self._dual_bound(final, dual))
        tail = list(window)[-max(1, int(cfg.averaging_fraction * k)):]
        averaged = tuple(np.mean(block, axis=0) for block in zip(*tail))
        for candidate in (averaged, final):
            rate, feasible = self._recover(candidate, pmax)
            if rate > best_rate:
                best_rate, best_powers = rate, feasible

        return AscentTrace(
            powers=best_powers,
            rate=float(best_rate),
            dual=dual,
            iterations=k,
            kkt_residual=self._kkt_residual(final, dual),
            dual_bound=float(best_bound),
            converged=converged,
        )

    def _recover(
        self, powers: tuple[np.ndarray, ...], pmax: np.ndarray
    ) -> tuple[float, tuple[np.ndarray, ...]]:
        feasible = tuple(scale_to_budget(p, budget) for p, budget in zip(powers, pmax))
        return float(self._constraint_values(feasible).min()), feasible

    @staticmethod
    def _normalized(dual: DualPoint, alpha_init: np.ndarray) -> np.ndarray:
        return np.concatenate([dual.lam, dual.alpha / alpha_init])

    @staticmethod
    def _step(
        dual: DualPoint, constraints: np.ndarray, residual: np.ndarray, step: float
    ) -> DualPoint:
        return DualPoint(
            lam=project_simplex(dual.lam - step * constraints),
            alpha=project_nonneg(dual.alpha + step * residual),
        )

    @staticmethod
    def _scaled_step(
        dual: DualPoint,
        constraints: np.ndarray,
        residual: np.ndarray,
        power_scale: np.ndarray,
        step: float,
    ) -> DualPoint:
        total = constraints.sum()
        lam = dual.lam - step * constraints / total if total > 0 else dual.lam
        ratio = np.clip(residual / power_scale, -1.0, 1.0)
        return DualPoint(
            lam=project_simplex(lam),
            alpha=project_nonneg(dual.alpha + step * dual.alpha * ratio),
        )

    def _log_start(self, title: str) -> None:
        if self._logger is not None:
            self._logger.log_title(title)

    def _log_end(self, label: str, trace: AscentTrace) -> None:
        if self._logger is None:
            return
        status = "converged" if trace.converged else "iteration cap reached"
        self._logger.log(
            f"{status} after {trace.iterations} iterations: {label}={trace.rate:.6f} "
            f"bound={trace.dual_bound:.6f} kkt={trace.kkt_residual:.2e}"
        )
