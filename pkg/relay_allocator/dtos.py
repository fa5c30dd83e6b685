from dataclasses import dataclass
from typing import Optional

import numpy as np

from relay_allocator.config import (
    ALPHA_FLOOR,
    DEFAULT_AVERAGING_FRACTION,
    DEFAULT_DUAL_UPDATE,
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITERS,
    DEFAULT_MIN_ITERS,
    DEFAULT_STEP0,
    DEFAULT_STEP_RULE,
)
from relay_allocator.constants import LINKS, DualUpdate, Objective, StepRule
from relay_allocator.exceptions import BudgetError, ConfigError, DimensionError


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Squared channel magnitudes of the four links, one entry per subcarrier.

    g1/g2 are the terminal-to-relay gains, gt1/gt2 the relay-to-terminal gains.
    """

    g1: np.ndarray
    g2: np.ndarray
    gt1: np.ndarray
    gt2: np.ndarray
    seed: int = 0
    n_taps: int = 1

    def __post_init__(self):
        for name in LINKS:
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        lengths = {getattr(self, name).shape for name in LINKS}
        if len(lengths) != 1 or self.g1.ndim != 1 or self.g1.size == 0:
            raise DimensionError(f"gain arrays must share one nonzero length, got {lengths}")

    @property
    def n_subcarriers(self) -> int:
        return self.g1.size

    def gains(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in LINKS}

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChannelRealization):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.n_taps == other.n_taps
            and all(np.array_equal(getattr(self, n), getattr(other, n)) for n in LINKS)
        )


@dataclass(frozen=True)
class Budgets:
    p1_max: float
    p2_max: float
    pr_max: float
    mu: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise BudgetError(f"mu must lie in (0, 1), got {self.mu}")
        if min(self.p1_max, self.p2_max, self.pr_max) < 0:
            raise BudgetError("power budgets must be nonnegative")

    @classmethod
    def equal(cls, budget: float, mu: float = 0.5) -> "Budgets":
        return cls(p1_max=budget, p2_max=budget, pr_max=budget, mu=mu)

    @classmethod
    def from_snr_db(cls, snr_db: float, n_subcarriers: int, mu: float = 0.5) -> "Budgets":
        """Total budget N·10^(s/10): uniform allocation gives SNR s per subcarrier."""
        return cls.equal(n_subcarriers * 10.0 ** (snr_db / 10.0), mu=mu)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    p1: np.ndarray
    p2: np.ndarray
    pr: np.ndarray

    def __post_init__(self):
        for name in ("p1", "p2", "pr"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if not (self.p1.shape == self.p2.shape == self.pr.shape) or self.p1.ndim != 1:
            raise DimensionError(
                f"power vectors must share one length, got "
                f"{self.p1.shape}, {self.p2.shape}, {self.pr.shape}"
            )

    @property
    def n_subcarriers(self) -> int:
        return self.p1.size

    @classmethod
    def zeros(cls, n_subcarriers: int) -> "PowerAllocation":
        zero = np.zeros(n_subcarriers)
        return cls(p1=zero, p2=zero, pr=zero)

    def clamped(self) -> "PowerAllocation":
        return PowerAllocation(
            p1=np.maximum(self.p1, 0.0),
            p2=np.maximum(self.p2, 0.0),
            pr=np.maximum(self.pr, 0.0),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerAllocation):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in ("p1", "p2", "pr")
        )


@dataclass(frozen=True)
class RateSummary:
    """Rate-constraint values in bits per OFDM block."""

    c_ma_1: float
    c_ma_2: float
    c_ma_sum: float
    c_bc_1: float
    c_bc_2: float
    r_exchange: float
    r_12: float = 0.0
    r_21: float = 0.0
    scheme: str = "type1"

    @property
    def sum_rate(self) -> float:
        return 2.0 * self.r_exchange

    def spectral_efficiency(self, n_subcarriers: int) -> float:
        return self.sum_rate / n_subcarriers


@dataclass
class DualPoint:
    lam: np.ndarray
    alpha: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.lam, self.alpha])

    def copy(self) -> "DualPoint":
        return DualPoint(lam=self.lam.copy(), alpha=self.alpha.copy())


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = DEFAULT_EPSILON
    max_iters: int = DEFAULT_MAX_ITERS
    step0: float = DEFAULT_STEP0
    step_rule: StepRule = StepRule(DEFAULT_STEP_RULE)
    min_iters: int = DEFAULT_MIN_ITERS
    averaging_fraction: float = DEFAULT_AVERAGING_FRACTION
    alpha_floor: float = ALPHA_FLOOR
    dual_update: DualUpdate = DualUpdate(DEFAULT_DUAL_UPDATE)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.step0 <= 0:
            raise ConfigError(f"step0 must be positive, got {self.step0}")
        if self.max_iters < 1 or self.min_iters < 0:
            raise ConfigError("max_iters must be >= 1 and min_iters >= 0")
        if not 0.0 < self.averaging_fraction <= 1.0:
            raise ConfigError("averaging_fraction must lie in (0, 1]")
        if self.alpha_floor <= 0:
            raise ConfigError("alpha_floor must be positive")

    def step(self, k: int) -> float:
        if self.step_rule == StepRule.HARMONIC:
            return self.step0 / k
        return self.step0 / np.sqrt(k)


@dataclass
class MaSolution:
    pa1: np.ndarray
    pa2: np.ndarray
    r_ma: float
    dual: DualPoint
    iterations: int
    kkt_residual: float
    dual_gap: float
    dual_bound: float = 0.0
    converged: bool = True


@dataclass
class BcSolution:
    par: np.ndarray
    r_bc: float
    dual: DualPoint
    iterations: int
    kkt_residual: float
    dual_gap: float = 0.0
    dual_bound: float = 0.0
    converged: bool = True


@dataclass
class Type2Solution:
    allocation: "PowerAllocation"
    rates: RateSummary
    iterations: int
    converged: bool = True


@dataclass
class OracleResult:
    rate: float
    allocation: PowerAllocation
    objective: Objective
    grid_points: int
    evaluations: int
    polished: bool = False


@dataclass
class SweepPoint:
    snr_db: float
    scheme: str
    mean_rate_bps_hz: float
    stderr: float
    n: int
    failures: int = 0


@dataclass
class ExchangeResult:
    allocation: PowerAllocation
    rates: RateSummary
    ma: Optional[MaSolution] = None
    bc: Optional[BcSolution] = None
    converged: bool = True
