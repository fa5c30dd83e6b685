"""Dual decomposition for the multiple-access (terminal power) subproblem.

For fixed multipliers the Lagrangian separates over subcarriers; each term

    f_n(P1, P2) = a1·P1 + a2·P2 - c1·ln(1 + g1·P1) - c2·ln(1 + g2·P2)
                  - c3·ln(1 + g1·P1 + g2·P2)

with c1 = mu·l1/ln2, c2 = mu·l2/ln2, c3 = mu·l3/(2·ln2) is minimized in closed
form by enumerating the four activity cases of its KKT conditions. The
multipliers are then moved along the constraint residuals and projected back
onto (simplex x nonnegative orthant).
"""

from math import log

import numpy as np

from relay_allocator.config import FACE_TOL, INNER_KKT_TOL
from relay_allocator.constants import InnerCase
from relay_allocator.dtos import Budgets, ChannelRealization, DualPoint, MaSolution, SolverConfig
from relay_allocator.exceptions import InnerSolveError, UnboundedInnerProblemError
from relay_allocator.numerics import real_roots_cubic_batch
from relay_allocator.rate_model import ma_constraints
from relay_allocator.subgradient import DualSubgradientSolver

LN2 = log(2.0)


def _weights(lam: np.ndarray, mu: float) -> tuple[float, float, float]:
    return mu * lam[0] / LN2, mu * lam[1] / LN2, mu * lam[2] / (2.0 * LN2)


def inner_objective(g1, g2, p1, p2, lam, alpha, mu) -> np.ndarray:
    c1, c2, c3 = _weights(lam, mu)
    return (
        alpha[0] * p1
        + alpha[1] * p2
        - c1 * np.log1p(g1 * p1)
        - c2 * np.log1p(g2 * p2)
        - c3 * np.log1p(g1 * p1 + g2 * p2)
    )


def inner_gradient(g1, g2, p1, p2, lam, alpha, mu) -> tuple[np.ndarray, np.ndarray]:
    c1, c2, c3 = _weights(lam, mu)
    shared = c3 / (1.0 + g1 * p1 + g2 * p2)
    d1 = alpha[0] - c1 * g1 / (1.0 + g1 * p1) - shared * g1
    d2 = alpha[1] - c2 * g2 / (1.0 + g2 * p2) - shared * g2
    return d1, d2


def kkt_residual(g1, g2, p1, p2, lam, alpha, mu) -> float:
    """Max natural residual |min(P, dL/dP)| over subcarriers and both powers."""
    d1, d2 = inner_gradient(g1, g2, p1, p2, lam, alpha, mu)
    return float(max(np.abs(np.minimum(p1, d1)).max(), np.abs(np.minimum(p2, d2)).max()))


def _check_bounded(g1, g2, lam, alpha, mu) -> None:
    c1, c2, c3 = _weights(lam, mu)
    if alpha[0] <= 0 and (c1 + c3) * np.max(g1) > 0:
        raise UnboundedInnerProblemError("alpha_1 = 0 with a positive weighted gain on link 1")
    if alpha[1] <= 0 and (c2 + c3) * np.max(g2) > 0:
        raise UnboundedInnerProblemError("alpha_2 = 0 with a positive weighted gain on link 2")


def _face_candidate(h_own, h_other, c_own, c3, a_own, a_other):
    """Interior point when the other link carries (almost) only the sum term.

    The other link's stationarity pins u = c3·h_other/a_other; the own power then
    follows from its own equation and the other takes the rest of u - 1.
    """
    u = c3 * h_other / a_other
    d = a_own - c3 * h_own / u
    with np.errstate(divide="ignore", invalid="ignore"):
        own = (c_own * h_own / d - 1.0) / h_own
    other = (u - 1.0 - h_own * own) / h_other
    ok = (u > 1.0) & (d > 0)
    return np.where(ok, own, np.nan), np.where(ok, other, np.nan)


def _both_active_candidates(g1, g2, lam, alpha, mu) -> tuple[np.ndarray, np.ndarray]:
    """Case 1 candidates, shape (N, 4); NaN where a root is absent or invalid."""
    c1, c2, c3 = _weights(lam, mu)
    a1, a2 = alpha
    n = g1.size
    p1 = np.full((n, 4), np.nan)
    p2 = np.full((n, 4), np.nan)
    both = (g1 > 0) & (g2 > 0)
    if not np.any(both):
        return p1, p2
    h1, h2 = g1[both], g2[both]

    if c3 == 0:
        # decoupled water-filling
        p1[both, 0] = c1 / a1 - 1.0 / h1
        p2[both, 0] = c2 / a2 - 1.0 / h2
    else:
        if c1 > 0 and c2 > 0:
            # cubic in u = 1 + x, x = g1·P1 + g2·P2
            b1, b2 = c3 * h1, c3 * h2
            k1, k2 = c1 * h1, c2 * h2
            roots = real_roots_cubic_batch(
                np.full(h1.size, a1 * a2),
                a1 * a2 - a1 * b2 - a2 * b1 - k1 * a2 - k2 * a1,
                b1 * b2 - a1 * b2 - a2 * b1 + k1 * b2 + k2 * b1,
                b1 * b2,
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                d1 = a1 - b1[:, None] / roots
                d2 = a2 - b2[:, None] / roots
                q1 = (k1[:, None] / d1 - 1.0) / h1[:, None]
                q2 = (k2[:, None] / d2 - 1.0) / h2[:, None]
            ok = np.isfinite(roots) & (roots > 1.0) & (d1 > 0) & (d2 > 0)
            p1[both, :3] = np.where(ok, q1, np.nan)
            p2[both, :3] = np.where(ok, q2, np.nan)
        # on or near a simplex face the cubic degenerates (0/0 in one power)
        if c2 <= FACE_TOL * c3 and c1 > 0:
            p1[both, 3], p2[both, 3] = _face_candidate(h1, h2, c1, c3, a1, a2)
        elif c1 <= FACE_TOL * c3 and c2 > 0:
            p2[both, 3], p1[both, 3] = _face_candidate(h2, h1, c2, c3, a2, a1)
        # c1 = c2 = 0 is the flat-segment tie, handled by the caller

    valid = (p1 > 0) & (p2 > 0)
    return np.where(valid, p1, np.nan), np.where(valid, p2, np.nan)


def _newton_polish(g1, g2, p1, p2, lam, alpha, mu, steps: int = 3):
    """Newton steps on the two stationarity equations of interior points."""
    c1, c2, c3 = _weights(lam, mu)
    for _ in range(steps):
        d1, d2 = inner_gradient(g1, g2, p1, p2, lam, alpha, mu)
        e1 = c1 * (g1 / (1.0 + g1 * p1)) ** 2
        e2 = c2 * (g2 / (1.0 + g2 * p2)) ** 2
        s = c3 / (1.0 + g1 * p1 + g2 * p2) ** 2
        h11, h22, h12 = e1 + s * g1 * g1, e2 + s * g2 * g2, s * g1 * g2
        det = h11 * h22 - h12 * h12
        with np.errstate(divide="ignore", invalid="ignore"):
            n1 = p1 - (h22 * d1 - h12 * d2) / det
            n2 = p2 - (h11 * d2 - h12 * d1) / det
        f1, f2 = inner_gradient(g1, g2, n1, n2, lam, alpha, mu)
        better = (
            (det > 0)
            & (n1 > 0)
            & (n2 > 0)
            & (np.maximum(np.abs(f1), np.abs(f2)) < np.maximum(np.abs(d1), np.abs(d2)))
        )
        p1 = np.where(better, n1, p1)
        p2 = np.where(better, n2, p2)
    return p1, p2


def inner_solve_all(
    g1: np.ndarray,
    g2: np.ndarray,
    dual: DualPoint,
    mu: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimize every per-subcarrier Lagrangian term; returns (P1, P2, case)."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    lam, alpha = dual.lam, dual.alpha
    _check_bounded(g1, g2, lam, alpha, mu)
    c1, c2, c3 = _weights(lam, mu)
    a1, a2 = alpha
    n = g1.size

    p1 = np.zeros(n)
    p2 = np.zeros(n)
    case = np.full(n, InnerCase.SILENT.value)
    decided = np.zeros(n, dtype=bool)

    cand1, cand2 = _both_active_candidates(g1, g2, lam, alpha, mu)
    if np.any(np.isfinite(cand1)):
        objective = inner_objective(g1[:, None], g2[:, None], cand1, cand2, lam, alpha, mu)
        objective = np.where(np.isfinite(objective), objective, np.inf)
        pick = np.argmin(objective, axis=1)
        rows = np.arange(n)
        found = np.isfinite(objective[rows, pick])
        q1, q2 = _newton_polish(
            g1[found], g2[found], cand1[rows, pick][found], cand2[rows, pick][found],
            lam, alpha, mu,
        )
        p1[found], p2[found] = q1, q2
        case[found] = InnerCase.BOTH_ACTIVE.value
        decided |= found

    if c1 == 0 and c2 == 0 and c3 > 0:
        # only the sum term is weighted: on equal price per unit gain the minimizer
        # set is a segment, take the point with equal received powers
        tie = ~decided & (g1 > 0) & (g2 > 0) & np.isclose(a1 * g2, a2 * g1, rtol=1e-12, atol=0.0)
        x = np.where(tie, c3 * g1 / a1 - 1.0, 0.0)
        flat = tie & (x > 0)
        p1[flat] = 0.5 * x[flat] / g1[flat]
        p2[flat] = 0.5 * x[flat] / g2[flat]
        case[flat] = InnerCase.BOTH_ACTIVE.value
        decided |= flat

    with np.errstate(divide="ignore"):
        only1 = np.where(g1 > 0, (c1 + c3) / a1 - 1.0 / g1, 0.0)
        only2 = np.where(g2 > 0, (c2 + c3) / a2 - 1.0 / g2, 0.0)
    first = (
        ~decided
        & (only1 > 0)
        & (a2 >= (c2 + c3 / (1.0 + g1 * np.maximum(only1, 0.0))) * g2)
    )
    p1[first] = only1[first]
    case[first] = InnerCase.ONLY_FIRST.value
    decided |= first

    second = (
        ~decided
        & (only2 > 0)
        & (a1 >= (c1 + c3 / (1.0 + g2 * np.maximum(only2, 0.0))) * g1)
    )
    p2[second] = only2[second]
    case[second] = InnerCase.ONLY_SECOND.value
    decided |= second

    silent_ok = (a1 >= (c1 + c3) * g1) & (a2 >= (c2 + c3) * g2)
    stuck = ~decided & ~silent_ok
    if np.any(stuck):
        # round-off at a case boundary: keep the best clipped candidate if it is stationary
        _resolve_boundary(g1, g2, lam, alpha, mu, stuck, only1, only2, p1, p2, case)
    return p1, p2, case


def _resolve_boundary(g1, g2, lam, alpha, mu, stuck, only1, only2, p1, p2, case):
    zeros = np.zeros(stuck.sum())
    options = [
        (np.maximum(only1[stuck], 0.0), zeros, InnerCase.ONLY_FIRST),
        (zeros, np.maximum(only2[stuck], 0.0), InnerCase.ONLY_SECOND),
        (zeros, zeros, InnerCase.SILENT),
    ]
    h1, h2 = g1[stuck], g2[stuck]
    values = np.array([inner_objective(h1, h2, x1, x2, lam, alpha, mu) for x1, x2, _ in options])
    pick = np.argmin(values, axis=0)
    idx = np.nonzero(stuck)[0]
    for j, (x1, x2, which) in enumerate(options):
        chosen = pick == j
        p1[idx[chosen]] = x1[chosen]
        p2[idx[chosen]] = x2[chosen]
        case[idx[chosen]] = which.value

    c1, c2, c3 = _weights(lam, mu)
    scale = max(1.0, float(np.max((c1 + c3) * h1)), float(np.max((c2 + c3) * h2)))
    residual = kkt_residual(h1, h2, p1[idx], p2[idx], lam, alpha, mu)
    if residual > INNER_KKT_TOL * scale:
        raise InnerSolveError(
            f"no stationary point found on {idx.size} subcarrier(s), residual {residual:.3e}"
        )


def inner_subcarrier_solve(
    g1n: float, g2n: float, dual: DualPoint, mu: float
) -> tuple[float, float]:
    p1, p2, _ = inner_solve_all(np.array([g1n]), np.array([g2n]), dual, mu)
    return float(p1[0]), float(p2[0])


def dual_bound(g1, g2, p1, p2, dual: DualPoint, budgets: Budgets) -> float:
    """Upper bound on the MA optimum: alpha·Pmax - sum_n f_n at the inner minimizer."""
    inner = inner_objective(g1, g2, p1, p2, dual.lam, dual.alpha, budgets.mu).sum()
    return float(dual.alpha[0] * budgets.p1_max + dual.alpha[1] * budgets.p2_max - inner)


class MaSolver(DualSubgradientSolver):
    n_rates = 3

    def solve(self, ch: ChannelRealization, budgets: Budgets) -> MaSolution:
        self._g1, self._g2, self._mu = ch.g1, ch.g2, budgets.mu
        self._budgets = budgets
        pmax = np.array([budgets.p1_max, budgets.p2_max])
        if pmax.min() <= 0 or ch.g1.max() == 0 or ch.g2.max() == 0:
            return self._silent_solution(ch.n_subcarriers)

        self._log_start(
            f"MA subproblem: N={ch.n_subcarriers} P1max={budgets.p1_max:g} "
            f"P2max={budgets.p2_max:g} mu={budgets.mu:g}"
        )
        mean_gain = np.array([ch.g1.mean(), ch.g2.mean()])
        trace = self._ascend(
            pmax=pmax,
            alpha_init=self._initial_prices(ch.g1, ch.g2, pmax, budgets.mu),
            power_scale=np.maximum(pmax, 1.0) + ch.n_subcarriers / mean_gain,
            n_subcarriers=ch.n_subcarriers,
        )
        self._log_end("R_MA", trace)
        return MaSolution(
            pa1=trace.powers[0],
            pa2=trace.powers[1],
            r_ma=trace.rate,
            dual=trace.dual,
            iterations=trace.iterations,
            kkt_residual=trace.kkt_residual,
            dual_gap=trace.dual_gap,
            dual_bound=trace.dual_bound,
            converged=trace.converged,
        )

    def _inner_solve(self, dual: DualPoint) -> tuple[np.ndarray, ...]:
        p1, p2, _ = inner_solve_all(self._g1, self._g2, dual, self._mu)
        return p1, p2

    def _constraint_values(self, powers: tuple[np.ndarray, ...]) -> np.ndarray:
        return ma_constraints(self._g1, self._g2, powers[0], powers[1], self._mu)

    def _dual_bound(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        return dual_bound(self._g1, self._g2, powers[0], powers[1], dual, self._budgets)

    def _kkt_residual(self, powers: tuple[np.ndarray, ...], dual: DualPoint) -> float:
        p1, p2 = powers
        return kkt_residual(self._g1, self._g2, p1, p2, dual.lam, dual.alpha, self._mu)

    @staticmethod
    def _initial_prices(g1, g2, pmax, mu) -> np.ndarray:
        """Marginal utility of uniform power under uniform rate weights."""
        n = g1.size
        weight = mu / (2.0 * LN2)
        return np.array(
            [
                weight * np.mean(g1 / (1.0 + g1 * pmax[0] / n)),
                weight * np.mean(g2 / (1.0 + g2 * pmax[1] / n)),
            ]
        )

    @staticmethod
    def _silent_solution(n: int) -> MaSolution:
        return MaSolution(
            pa1=np.zeros(n),
            pa2=np.zeros(n),
            r_ma=0.0,
            dual=DualPoint(lam=np.full(3, 1.0 / 3.0), alpha=np.zeros(2)),
            iterations=0,
            kkt_residual=0.0,
            dual_gap=0.0,
        )


def solve_ma(
    ch: ChannelRealization, budgets: Budgets, cfg: SolverConfig | None = None
) -> MaSolution:
    return MaSolver(config=cfg).solve(ch, budgets)
