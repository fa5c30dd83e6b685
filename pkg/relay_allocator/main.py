from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from relay_allocator.baselines import Type2Solver
from relay_allocator.channel_model import (
    generate_channel,
    load_channel,
    realization_seed,
    save_allocation,
    save_channel,
)
from relay_allocator.config import CHANNEL_FILE_PATTERN, SWEEP_COLUMNS
from relay_allocator.constants import Scheme
from relay_allocator.dtos import (
    Budgets,
    ChannelRealization,
    PowerAllocation,
    RateSummary,
    SolverConfig,
    SweepPoint,
)
from relay_allocator.exceptions import RelayAllocatorError
from relay_allocator.exchange_solver import ExchangeSolver, solve_uniform
from relay_allocator.log import Log

GAP_LEVEL_BPS_HZ = 2.0
REPORTED_GAPS = (
    ("coding gain", Scheme.TYPE1_OPT, Scheme.TYPE2_OPT),
    ("PA gain", Scheme.TYPE1_OPT, Scheme.TYPE1_UNIFORM),
)


def solve_scheme(
    scheme: Scheme,
    ch: ChannelRealization,
    budgets: Budgets,
    solver_config: SolverConfig,
    logger: Log | None = None,
) -> tuple[PowerAllocation, RateSummary, bool]:
    """Returns the allocation, its rates and whether the iterative solver converged."""
    if scheme == Scheme.TYPE1_OPT:
        result = ExchangeSolver(config=solver_config, logger=logger).solve(ch, budgets)
        return result.allocation, result.rates, result.converged
    if scheme == Scheme.TYPE2_OPT:
        solution = Type2Solver(config=solver_config, logger=logger).solve(ch, budgets)
        return solution.allocation, solution.rates, solution.converged
    allocation, rates = solve_uniform(ch, budgets)
    return allocation, rates, True


def _realization_rates(
    schemes: tuple[Scheme, ...],
    n_subcarriers: int,
    n_taps: int,
    seed: int,
    budgets: Budgets,
    solver_config: SolverConfig,
) -> list[tuple[float, bool]]:
    """Spectral efficiency and success flag per scheme for one seeded realization."""
    ch = generate_channel(n_subcarriers, n_taps, seed)
    outcome = []
    for scheme in schemes:
        try:
            _, rates, converged = solve_scheme(scheme, ch, budgets, solver_config)
        except RelayAllocatorError:
            outcome.append((float("nan"), False))
            continue
        outcome.append((rates.spectral_efficiency(n_subcarriers), converged))
    return outcome


def _summarize(snr_db: float, scheme: Scheme, outcome: list[tuple[float, bool]]) -> SweepPoint:
    rates = np.array([rate for rate, _ in outcome])
    rates = rates[np.isfinite(rates)]
    failures = sum(1 for _, ok in outcome if not ok)
    if rates.size == 0:
        return SweepPoint(snr_db, scheme.value, float("nan"), float("nan"), 0, failures)
    stderr = float(rates.std(ddof=1) / np.sqrt(rates.size)) if rates.size > 1 else 0.0
    return SweepPoint(
        snr_db=snr_db,
        scheme=scheme.value,
        mean_rate_bps_hz=float(rates.mean()),
        stderr=stderr,
        n=int(rates.size),
        failures=failures,
    )


def horizontal_gap_db(
    rows: pd.DataFrame, scheme_a: str, scheme_b: str, level: float = GAP_LEVEL_BPS_HZ
) -> float | None:
    """SNR scheme_b needs to reach `level` minus the SNR scheme_a needs.

    None if either curve never reaches it.
    """
    crossings = [_snr_at_level(rows, scheme, level) for scheme in (scheme_a, scheme_b)]
    if None in crossings:
        return None
    return crossings[1] - crossings[0]


def _snr_at_level(rows: pd.DataFrame, scheme: str, level: float) -> float | None:
    curve = rows[rows["scheme"] == scheme].sort_values("snr_db")
    snr = curve["snr_db"].to_numpy(dtype=float)
    rate = curve["mean_rate_bps_hz"].to_numpy(dtype=float)
    above = np.nonzero(rate >= level)[0]
    if above.size == 0:
        return None
    first = int(above[0])
    if first == 0:
        return float(snr[0]) if rate[0] == level else None
    lo, hi = first - 1, first
    return float(snr[lo] + (level - rate[lo]) * (snr[hi] - snr[lo]) / (rate[hi] - rate[lo]))


class ExperimentRunner:
    def __init__(
        self,
        logger: Log,
        solver_config: SolverConfig | None = None,
        workers: int = 1,
    ):
        self._logger = logger
        self._solver_config = solver_config or SolverConfig()
        self._workers = workers

    def run_gen_channels(
        self, out_dir, count: int, n_subcarriers: int, n_taps: int, seed: int
    ) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self._logger.log_title(f"Generating {count} channel realizations in {out_dir}")
        paths = []
        for index in range(count):
            ch = generate_channel(n_subcarriers, n_taps, realization_seed(seed, index))
            path = out_dir / CHANNEL_FILE_PATTERN.format(index=index)
            save_channel(ch, path)
            paths.append(path)
            self._logger.log(f"{path} (seed={ch.seed})")
        return paths

    def run_solve(
        self,
        channel_path,
        scheme: Scheme,
        mu: float,
        budget: float | None = None,
        snr_db: float | None = None,
        out_path=None,
    ) -> RateSummary:
        """Budgets are `budget` per node, or N·10^(snr_db/10) with N read from the fixture."""
        ch = load_channel(channel_path)
        if budget is not None:
            budgets = Budgets.equal(budget, mu=mu)
        else:
            budgets = Budgets.from_snr_db(snr_db, ch.n_subcarriers, mu=mu)
        allocation, rates, converged = solve_scheme(
            scheme, ch, budgets, self._solver_config, logger=self._logger
        )
        out_path = Path(out_path) if out_path else self._allocation_path(channel_path, scheme)
        save_allocation(allocation, out_path, scheme.value)

        self._logger.log_title(f"{scheme.value} on {channel_path}")
        self._logger.log_rates(scheme.value, rates)
        self._logger.log(f"R_12={rates.r_12:.6f} R_21={rates.r_21:.6f}")
        self._logger.log(
            f"sum rate {rates.sum_rate:.6f} bits/block, "
            f"{rates.spectral_efficiency(ch.n_subcarriers):.6f} bits/s/Hz"
        )
        if not converged:
            self._logger.log("warning: iteration cap reached before convergence")
        self._logger.log(f"allocation written to {out_path}")
        return rates

    def run_sweep(
        self,
        snr_db: list[float],
        realizations: int,
        seed: int,
        schemes: list[Scheme],
        n_subcarriers: int,
        n_taps: int,
        mu: float,
        out_path,
    ) -> pd.DataFrame:
        schemes = tuple(schemes)
        points = []
        for snr_index, snr in enumerate(snr_db):
            self._logger.log_title(f"SNR {snr:g} dB ({realizations} realizations)")
            budgets = Budgets.from_snr_db(snr, n_subcarriers, mu=mu)
            seeds = [realization_seed(seed, snr_index, r) for r in range(realizations)]
            outcomes = self._run_realizations(schemes, n_subcarriers, n_taps, seeds, budgets)
            for position, scheme in enumerate(schemes):
                point = _summarize(snr, scheme, [outcome[position] for outcome in outcomes])
                points.append(point)
                self._logger.log(
                    f"{scheme.value}: {point.mean_rate_bps_hz:.6f} bits/s/Hz "
                    f"(stderr {point.stderr:.2e}, failures {point.failures})"
                )

        frame = pd.DataFrame([asdict(point) for point in points], columns=SWEEP_COLUMNS)
        frame = frame.sort_values(["snr_db", "scheme"], kind="stable").reset_index(drop=True)
        frame.to_csv(out_path, index=False)
        self._logger.log_title(f"Sweep written to {out_path}")
        self._log_gaps(frame)
        return frame

    def _run_realizations(self, schemes, n_subcarriers, n_taps, seeds, budgets):
        args = (
            [schemes] * len(seeds),
            [n_subcarriers] * len(seeds),
            [n_taps] * len(seeds),
            seeds,
            [budgets] * len(seeds),
            [self._solver_config] * len(seeds),
        )
        if self._workers <= 1:
            return list(map(_realization_rates, *args))
        with ProcessPoolExecutor(max_workers=self._workers) as pool:
            return list(pool.map(_realization_rates, *args))

    def _log_gaps(self, frame: pd.DataFrame) -> None:
        present = set(frame["scheme"])
        for label, scheme_a, scheme_b in REPORTED_GAPS:
            if not {scheme_a.value, scheme_b.value} <= present:
                continue
            gap = horizontal_gap_db(frame, scheme_a.value, scheme_b.value)
            if gap is None:
                self._logger.log(f"{label}: {GAP_LEVEL_BPS_HZ:g} bits/s/Hz not reached")
            else:
                self._logger.log(
                    f"{label} ({scheme_a.value} vs {scheme_b.value}) at "
                    f"{GAP_LEVEL_BPS_HZ:g} bits/s/Hz: {gap:.2f} dB"
                )

    @staticmethod
    def _allocation_path(channel_path, scheme: Scheme) -> Path:
        channel_path = Path(channel_path)
        return channel_path.with_name(f"{channel_path.stem}.{scheme.value}.pa.txt")
