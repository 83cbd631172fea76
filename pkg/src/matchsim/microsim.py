"""Finite-N stochastic matching process.

One business year runs in three stages: every student posts entry sheets
to a distinct companies drawn from the aggregation probabilities, each
company accepts its applicants up to the quota v* (a uniform lottery when
over-subscribed), and each multiply-accepted student joins the highest
ranked company.  The year's sheet counts feed next year's probabilities
through the mismatch term.

Randomness is counter-based: year t of a run seeded with s draws from a
Philox stream keyed (s, t), first the application uniforms, then the
lottery priorities, each of shape (N, K).  Replicas and years are thus
reproducible independent of execution order, and the staged operations
below consume the exact same numbers as the fused kernel used by
run_market.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, _reference
from .core import MarketConfig, assert_distribution, gibbs_weights

MASK64 = (1 << 64) - 1


@dataclass
class MicroOutcome:
    """One realized business year."""

    year: int
    v: np.ndarray                    # sheet counts per company, (K,)
    hires: np.ndarray                # students joining each company, (K,)
    U: float                         # unemployment rate
    Omega: float                     # unfilled fraction of total quota
    s: np.ndarray | None = None      # acceptance mask (N, K), on request
    chosen: np.ndarray | None = None  # joined company per student, 0-based, -1 none


def year_rng(seed: int, year: int) -> np.random.Generator:
    """The year's private generator; keyed, not sequential."""
    return np.random.Generator(np.random.Philox(key=[seed & MASK64, year]))


def race_keys(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Exponential race keys -log1p(-u)/p.

    The a smallest keys of a row are distributed exactly as a distinct
    sequential draws from p with renormalization after each draw, which
    is the sheet-posting rule.  Zero-probability companies get +inf and
    are only ever chosen when fewer than a companies have support.
    """
    with np.errstate(divide="ignore"):
        return -np.log1p(-u) / p


def post_sheets(p: np.ndarray, cfg: MarketConfig,
                rng: np.random.Generator) -> np.ndarray:
    """Application mask (N, K): each student's a distinct companies."""
    p = assert_distribution(p, cfg.K)
    u = rng.random((cfg.N, cfg.K))
    return _reference.sheets_from_keys(race_keys(p, u),
                                       cfg.sheets_per_student)


def acceptance_lottery(applications: np.ndarray, cfg: MarketConfig,
                       rng: np.random.Generator) -> np.ndarray:
    """Acceptance mask (N, K) after the per-company quota lottery.

    Under-subscribed companies accept everyone who applied; a company
    with more applicants than quota keeps v* of them uniformly at
    random.
    """
    applications = np.asarray(applications, dtype=bool)
    if applications.shape != (cfg.N, cfg.K):
        raise ValueError(f"applications must have shape ({cfg.N}, {cfg.K})")
    v_star, _, _ = cfg.micro_quota()
    u = rng.random((cfg.N, cfg.K))
    return _reference.lottery(applications, u, v_star)


def resolve_choices(acceptances: np.ndarray,
                    ranking_scores: np.ndarray | None = None):
    """Assign each accepted student to their best company.

    ranking_scores, when given, must be strictly increasing (the model's
    prestige schedule is), so the best accepted company is simply the
    one with the largest index.  Returns (hires, chosen) with hires the
    per-company head count and chosen the 0-based company per student
    (-1 for students rejected everywhere).
    """
    acceptances = np.asarray(acceptances, dtype=bool)
    K = acceptances.shape[1]
    if ranking_scores is not None:
        ranking_scores = np.asarray(ranking_scores, dtype=float)
        if ranking_scores.shape != (K,) or np.any(np.diff(ranking_scores) <= 0):
            raise ValueError("ranking_scores must be strictly increasing "
                             "over the K companies")
    chosen = _reference.resolve(acceptances)
    hires = np.bincount(chosen[chosen >= 0], minlength=K).astype(np.int64)
    return hires, chosen


def observables(hires: np.ndarray, cfg: MarketConfig) -> tuple[float, float]:
    """(U, Omega) for one realization.

    U = 1 - sum(hires)/N and Omega = 1 - sum(hires)/V with the integer
    quota total V = K*v*; with alpha recomputed as V/N these satisfy
    U = alpha*Omega + 1 - alpha identically.  A market with zero quota
    reports Omega = 1 (every position unfilled, vacuously).
    """
    hires = np.asarray(hires)
    matched = int(hires.sum())
    _, total, _ = cfg.micro_quota()
    u_rate = 1.0 - matched / cfg.N
    omega = 1.0 - matched / total if total > 0 else 1.0
    return u_rate, omega


def run_market(cfg: MarketConfig, T_years: int,
               keep_details: bool = False) -> list[MicroOutcome]:
    """Simulate T_years of the market; fully determined by cfg.seed.

    Year 0 posts sheets from the uniform distribution; every later year
    applies the Boltzmann weights to the previous year's mismatch.  Set
    keep_details to retain the acceptance mask and per-student company
    in each outcome (memory N*K per year).
    """
    if T_years < 1:
        raise ValueError("T_years must be at least 1")
    v_star, total, _ = cfg.micro_quota()
    h = np.zeros(cfg.K)
    outcomes = []
    for year in range(T_years):
        if year == 0:
            p = np.full(cfg.K, 1.0 / cfg.K)
        else:
            p = gibbs_weights(h, cfg)
        rng = year_rng(cfg.seed, year)
        u_apply = rng.random((cfg.N, cfg.K))
        u_prio = rng.random((cfg.N, cfg.K))
        keys = race_keys(p, u_apply)
        v, s, chosen = _backend.year_step(keys, u_prio, v_star,
                                          cfg.sheets_per_student)
        hires = np.bincount(chosen[chosen >= 0], minlength=cfg.K).astype(np.int64)
        u_rate, omega = observables(hires, cfg)
        if total > 0:
            h = np.abs(v_star - v) / total
        else:
            h = np.zeros(cfg.K)
        outcomes.append(MicroOutcome(
            year=year, v=v, hires=hires, U=u_rate, Omega=omega,
            s=s.astype(bool) if keep_details else None,
            chosen=chosen if keep_details else None))
    return outcomes
