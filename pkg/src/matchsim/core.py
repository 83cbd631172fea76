"""Shared domain objects for the matching model.

The market has K companies ranked by a static prestige score
eps_k = 1 + k/K (k = 1..K, so k = K is the most prestigious) and N
students who each post a entry sheets per business year.  Company k
offers v* = alpha*N/K positions, alpha being the job-offer ratio.
Students weight companies by a Boltzmann factor built from two pulls:

    energy(k)  =  -gamma * log(eps_k) + beta * h_k(prev year)

where h_k is the local mismatch the company suffered last year.  Large
gamma concentrates applications on prestigious companies; large beta
pushes students away from companies whose sheet count missed their
quota.  Both the deterministic (mean-field) and stochastic engines in
this package consume the objects defined here.

Company indices are 1-based in every public signature to match the
ranking convention; vectors are stored 0-based with slot i holding
company k = i + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

PROB_TOL = 1e-12


@dataclass(frozen=True)
class MarketConfig:
    """All model constants for one market instance.

    Parameters
    ----------
    K : int
        Number of companies, at least 2.
    N : int
        Number of students.
    alpha : float
        Job-offer ratio; total positions V = alpha * N.
    beta : float
        Strength of the mismatch-avoidance pull (market history term).
    gamma : float
        Strength of the ranking preference.
    sheets_per_student : int
        Entry sheets each student posts per year (distinct companies).
    failure_threshold : float
        A company whose aggregation probability drops below this is
        counted as failed.
    seed : int
        Base RNG seed for the stochastic engine.
    max_iters, fixed_point_tol, oscillation_window, oscillation_tol :
        Mean-field trajectory detector parameters.
    """

    K: int
    N: int
    alpha: float
    beta: float
    gamma: float
    sheets_per_student: int = 3
    failure_threshold: float = 1e-5
    seed: int = 0
    max_iters: int = 10_000
    fixed_point_tol: float = 1e-10
    oscillation_window: int = 16
    oscillation_tol: float = 1e-8

    @property
    def total_quota(self) -> float:
        """V = alpha * N, as a real number."""
        return self.alpha * self.N

    @property
    def quota_real(self) -> float:
        """Per-company quota v* = alpha * N / K, kept real for mean-field use."""
        return self.alpha * self.N / self.K

    def micro_quota(self) -> tuple[int, int, float]:
        """Integer quota for the stochastic engine.

        Returns (v_star, V, alpha_eff) with v_star = round(alpha*N/K),
        V = K * v_star and alpha_eff = V / N.  Recomputing alpha from the
        rounded quota keeps the U = alpha*Omega + 1 - alpha identity exact
        on every realization.
        """
        v_star = int(np.rint(self.quota_real))
        total = self.K * v_star
        return v_star, total, total / self.N


_CONFIG_KEYS = {
    "K": int,
    "N": int,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "sheets_per_student": int,
    "failure_threshold": float,
    "seed": int,
    "max_iters": int,
    "fixed_point_tol": float,
    "oscillation_window": int,
    "oscillation_tol": float,
}

_ALIASES = {"a": "sheets_per_student", "eps": "failure_threshold",
            "iters": "max_iters"}


def make_config(raw: Mapping[str, object]) -> MarketConfig:
    """Validate a key-value map into a MarketConfig.

    Accepts the field names of MarketConfig plus the short aliases
    ``a`` (sheets_per_student), ``eps`` (failure_threshold) and
    ``iters`` (max_iters).  K, N, alpha, beta and gamma are required.
    Raises ValueError naming the offending field.
    """
    params: dict = {}
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        try:
            params[name] = _CONFIG_KEYS[name](value)
        except (TypeError, ValueError):
            raise ValueError(f"{key} must be a {_CONFIG_KEYS[name].__name__}, "
                             f"got {value!r}") from None

    for required in ("K", "N", "alpha", "beta", "gamma"):
        if required not in params:
            raise ValueError(f"missing config key: {required}")

    cfg = MarketConfig(**params)
    if cfg.K < 2:
        raise ValueError("K must be at least 2")
    if cfg.N < 1:
        raise ValueError("N must be at least 1")
    if cfg.alpha <= 0:
        raise ValueError("alpha must be positive")
    if cfg.beta < 0:
        raise ValueError("beta must be non-negative")
    if cfg.gamma < 0:
        raise ValueError("gamma must be non-negative")
    if cfg.sheets_per_student < 1:
        raise ValueError("sheets_per_student must be at least 1")
    if cfg.sheets_per_student > cfg.K:
        raise ValueError("sheets_per_student cannot exceed K")
    if cfg.failure_threshold <= 0:
        raise ValueError("failure_threshold must be positive")
    if cfg.seed < 0:
        raise ValueError("seed must be non-negative")
    if cfg.max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if cfg.oscillation_window < 2:
        raise ValueError("oscillation_window must be at least 2")
    return cfg


def ranking(K: int) -> np.ndarray:
    """Prestige scores eps_k = 1 + k/K for k = 1..K; slot i is company i+1."""
    return 1.0 + np.arange(1, K + 1) / K


def local_mismatch(v_k: float, v_star: float, V: float) -> float:
    """Normalized quota gap |v_star - v_k| / V of a single company."""
    if V <= 0:
        raise ValueError("V must be positive")
    if v_k < 0:
        raise ValueError("v_k must be non-negative")
    return abs(v_star - v_k) / V


def energy(k: int, h_prev: float, cfg: MarketConfig) -> float:
    """Energy -gamma*log(1 + k/K) + beta*h_prev of company k.

    Lower energy attracts more applicants.  h_prev is the company's
    mismatch from the previous year.
    """
    if not 1 <= k <= cfg.K:
        raise ValueError(f"company index {k} outside 1..{cfg.K}")
    if h_prev < 0:
        raise ValueError("h_prev must be non-negative")
    return -cfg.gamma * np.log1p(k / cfg.K) + cfg.beta * h_prev


def gibbs_weights(h_prev: np.ndarray, cfg: MarketConfig) -> np.ndarray:
    """Aggregation probabilities P_k over companies given last year's mismatch.

    P_k is proportional to exp(-energy(k, h_prev[k])).  The maximum
    weight is subtracted before exponentiation so that large gamma or
    beta cannot overflow; the subtraction cancels in the normalization.

    Parameters
    ----------
    h_prev : array of shape (K,)
        Per-company mismatch h_k from the previous year, entries >= 0.
    cfg : MarketConfig

    Returns
    -------
    array of shape (K,) summing to 1.
    """
    h_prev = np.asarray(h_prev, dtype=float)
    if h_prev.shape != (cfg.K,):
        raise ValueError(f"h_prev must have shape ({cfg.K},)")
    if np.any(h_prev < 0):
        raise ValueError("h_prev entries must be non-negative")
    w = cfg.gamma * np.log(ranking(cfg.K)) - cfg.beta * h_prev
    w -= w.max()
    e = np.exp(w)
    return e / e.sum()


def assert_distribution(p: np.ndarray, K: int | None = None) -> np.ndarray:
    """Check the probability-vector contract; returns p as a float array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (K is not None and p.shape != (K,)):
        raise ValueError("probability vector has wrong shape")
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("probability entries outside [0, 1]")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError("probability vector does not sum to 1")
    return p
