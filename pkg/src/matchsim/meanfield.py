"""Deterministic mean-field dynamics of the aggregation probabilities.

In the N -> infinity limit the yearly update of P_k closes on itself:

    P_k(t)  propto  exp[ gamma*log(1 + k/K) - (beta/alpha)*|P_k(t-1) - alpha/K| ]

The absolute-value kink sits at the mean-field quota point alpha/K and is
evaluated as written (no smoothing); a state pinned exactly at the kink
simply feels no history force.  iterate() runs the map with a verdict
detector, critical_gamma_scan() locates the ranking strength at which the
least prestigious company's probability collapses, and frozen_line()
evaluates the closed-form condition for rank reversals.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import MarketConfig, assert_distribution, ranking

VERDICT_FIXED_POINT = "fixed_point"
VERDICT_OSCILLATION = "oscillation"
VERDICT_UNDECIDED = "undecided"


@dataclass
class Trajectory:
    """Result of iterating the map from one initial condition.

    states holds the visited distributions (including the initial one)
    when recording is on, otherwise None.  final is always the last
    state.  failure_first_time is the first step at which P_1 dropped
    below the failure threshold, independent of the verdict.  period is
    the detected oscillation lag, None unless verdict is oscillation.
    """

    verdict: str
    iterations_run: int
    final: np.ndarray
    failure_first_time: int | None = None
    period: int | None = None
    states: np.ndarray | None = None
    late_window: np.ndarray | None = None

    def steady_p1(self) -> float:
        """Late-time P_1: the fixed point value, or the mean over the
        detector window when the trajectory did not converge."""
        if self.verdict == VERDICT_FIXED_POINT or self.late_window is None:
            return float(self.final[0])
        return float(self.late_window[:, 0].mean())


@dataclass
class FrozenLineReport:
    """Reversibility of the top company against each challenger gap m."""

    K: int
    ratio: float                      # beta / (gamma * alpha)
    m_star: float                     # real crossing of the boundary curve
    frozen_set: frozenset[int]
    reversible_set: frozenset[int]
    lhs: np.ndarray = field(repr=False)   # log(2K/(2K-m)) for m = 1..K-1


@dataclass
class GammaScan:
    """Grid scan of steady-state P_1 against gamma."""

    gamma_c: float | None
    rows: list[tuple[float, float, bool]]      # (gamma, steady P_1, failed)

    @property
    def failed_anywhere(self) -> bool:
        return any(r[2] for r in self.rows)


def map_step(p_prev: np.ndarray, cfg: MarketConfig) -> np.ndarray:
    """One application of the mean-field map to a distribution."""
    p_prev = assert_distribution(p_prev, cfg.K)
    w = cfg.gamma * np.log(ranking(cfg.K))
    w = w - (cfg.beta / cfg.alpha) * np.abs(p_prev - cfg.alpha / cfg.K)
    w -= w.max()
    e = np.exp(w)
    return e / e.sum()


def iterate(cfg: MarketConfig, p0: np.ndarray | None = None,
            max_iters: int | None = None,
            record_states: bool = True) -> Trajectory:
    """Run the map until a verdict or the iteration budget is exhausted.

    Starting from p0 (uniform by default), each step is checked in this
    order: business failure (P_1 below cfg.failure_threshold, recorded
    once, never stops the run), convergence (successive max-norm change
    below cfg.fixed_point_tol), recurrence (current state within
    cfg.oscillation_tol of a state from the last cfg.oscillation_window
    steps at lag >= 2 while the lag-1 change is still at least
    cfg.oscillation_tol).  Convergence and recurrence stop the run with
    verdicts fixed_point and oscillation; hitting the budget yields
    undecided, a legitimate outcome for aperiodic or slowly mixing
    trajectories.
    """
    if max_iters is None:
        max_iters = cfg.max_iters
    if p0 is None:
        p = np.full(cfg.K, 1.0 / cfg.K)
    else:
        p = assert_distribution(p0, cfg.K).copy()

    window: deque[np.ndarray] = deque(maxlen=cfg.oscillation_window)
    window.append(p.copy())
    states = [p.copy()] if record_states else None
    failure_t: int | None = None
    verdict = VERDICT_UNDECIDED
    period: int | None = None
    t = 0

    for t in range(1, max_iters + 1):
        q = map_step(p, cfg)
        if record_states:
            states.append(q.copy())
        if failure_t is None and q[0] < cfg.failure_threshold:
            failure_t = t
        lag1 = np.max(np.abs(q - p))
        if lag1 < cfg.fixed_point_tol:
            verdict = VERDICT_FIXED_POINT
            p = q
            window.append(q.copy())
            break
        if lag1 >= cfg.oscillation_tol:
            hit = None
            for lag in range(2, len(window) + 1):
                if np.max(np.abs(q - window[-lag])) < cfg.oscillation_tol:
                    hit = lag
                    break
            if hit is not None:
                verdict = VERDICT_OSCILLATION
                period = hit
                p = q
                window.append(q.copy())
                break
        window.append(q.copy())
        p = q

    return Trajectory(
        verdict=verdict,
        iterations_run=t,
        final=p,
        failure_first_time=failure_t,
        period=period,
        states=np.array(states) if record_states else None,
        late_window=np.array(window),
    )


def _steady_p1(cfg: MarketConfig, gamma: float) -> float:
    from dataclasses import replace
    traj = iterate(replace(cfg, gamma=gamma), record_states=False)
    return traj.steady_p1()


def critical_gamma_scan(cfg: MarketConfig, gamma_grid) -> GammaScan:
    """Steady-state P_1 along a gamma grid, with the failure onset refined.

    Each grid point is an independent run from the uniform start.  The
    scan reports the table (gamma, steady P_1, failed) and, when some
    grid point fails, the onset gamma_c refined by bisection between the
    bracketing grid points down to a width of 1e-2.  gamma_c is None when
    P_1 stays above the threshold across the whole grid.
    """
    grid = [float(g) for g in gamma_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma_grid must be strictly increasing")
    eps = cfg.failure_threshold

    rows = []
    first_failed = None
    for i, g in enumerate(grid):
        p1 = _steady_p1(cfg, g)
        failed = p1 < eps
        rows.append((g, p1, failed))
        if failed and first_failed is None:
            first_failed = i

    if first_failed is None:
        return GammaScan(gamma_c=None, rows=rows)
    if first_failed == 0:
        return GammaScan(gamma_c=grid[0], rows=rows)

    lo, hi = grid[first_failed - 1], grid[first_failed]
    while hi - lo > 1e-2:
        mid = 0.5 * (lo + hi)
        if _steady_p1(cfg, mid) < eps:
            hi = mid
        else:
            lo = mid
    return GammaScan(gamma_c=0.5 * (lo + hi), rows=rows)


def reversal_condition(K: int, m: int, beta: float, gamma: float,
                       alpha: float) -> bool:
    """Can the top company and the (K-m)-th swap ranks between years?

    True when log(2K/(2K-m)) exceeds beta/(gamma*alpha): the ranking gap
    is small enough for one year's mismatch feedback to overcome it.
    """
    if not 1 <= m <= K - 1:
        raise ValueError(f"m must be in 1..{K - 1}")
    if gamma <= 0:
        raise ValueError("gamma must be positive, the reversal ratio "
                         "beta/(gamma*alpha) is undefined at gamma=0")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return np.log(2.0 * K / (2.0 * K - m)) > beta / (gamma * alpha)


def frozen_line(K: int, beta: float, gamma: float,
                alpha: float) -> FrozenLineReport:
    """Partition the challenger gaps m = 1..K-1 into frozen and reversible.

    Also reports the boundary curve log(2K/(2K-m)) and its real crossing
    m* = 2K(1 - exp(-ratio)) with the constant ratio line, matching the
    frozen-ranking phase plot.
    """
    ratio = beta / (gamma * alpha) if gamma > 0 and alpha > 0 else None
    if ratio is None:
        raise ValueError("gamma and alpha must be positive")
    m = np.arange(1, K)
    lhs = np.log(2.0 * K / (2.0 * K - m))
    reversible = {int(v) for v in m[lhs > ratio]}
    frozen = {int(v) for v in m[lhs <= ratio]}
    m_star = 2.0 * K * (1.0 - np.exp(-ratio))
    return FrozenLineReport(K=K, ratio=ratio, m_star=float(m_star),
                            frozen_set=frozenset(frozen),
                            reversible_set=frozenset(reversible),
                            lhs=lhs)
