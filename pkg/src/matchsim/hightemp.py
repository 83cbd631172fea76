"""Closed-form steady-state approximations for small gamma and beta/alpha.

Expanding the map's fixed-point condition in the two couplings gives, per
order, a pair of candidate solutions: one valid where P_k sits above the
quota point alpha/K (companies gathering more sheets than slots) and one
below (the "hatted" branch).  Orders available:

  order 0:  P_k = 1/K (students pick companies at random)
  order 1:  P_k = (1 +- beta/K + gamma*log(1+k/K)) / (K*(1+2*gamma*log2-gamma) +- beta)
  order 2:  adds the quadratic corrections through the constants
            chi1 = (1-log2)^2, chi2 = 2*log2-1, B = K*(2*gamma*log2-gamma+1)+beta
            and psi_± = gamma*log(1+k/K) ± beta/K + 1.

Order 1 relies on the large-K approximation sum_k log(1+k/K) ~ K*(2*log2-1);
at K=50 that identity is off by ~0.35, which leaves a small linear-in-
coupling error floor in both order-1 and order-2 values (measured in the
test suite rather than hidden).

Branch assignment is by self-consistency: the above-branch value is used
where it lands above alpha/K, the below-branch where it lands below, and
the quota value alpha/K where neither does.  From the selected profile the
per-company acceptance probability phi_k and the closed-form unemployment
rate are evaluated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import MarketConfig, ranking

LOG2 = math.log(2.0)
CHI1 = (1.0 - LOG2) ** 2          # = (log2)^2 - 2*log2 + 1
CHI2 = 2.0 * LOG2 - 1.0

BRANCH_ABOVE = 1
BRANCH_BELOW = -1
BRANCH_CROSSING = 0


@dataclass
class ExpansionResult:
    order: int
    K: int
    alpha: float
    p_above: np.ndarray
    p_below: np.ndarray
    branch: np.ndarray            # per k: +1 above, -1 below, 0 crossing
    constants: dict

    @property
    def selected(self) -> np.ndarray:
        """Per-company value on the self-consistent branch."""
        return np.where(self.branch == BRANCH_ABOVE, self.p_above,
                        np.where(self.branch == BRANCH_BELOW, self.p_below,
                                 self.alpha / self.K))


@dataclass
class AcceptanceProfile:
    """Probability phi_k that an arbitrary student is accepted by company k."""

    phi: np.ndarray
    crossing_k: np.ndarray        # 1-based company indices pinned at alpha/K


def _assign_branches(p_above: np.ndarray, p_below: np.ndarray,
                     alpha: float, K: int) -> np.ndarray:
    quota = alpha / K
    branch = np.full(K, BRANCH_CROSSING, dtype=np.int8)
    branch[p_above > quota] = BRANCH_ABOVE
    below = (p_below < quota) & (branch == BRANCH_CROSSING)
    branch[below] = BRANCH_BELOW
    return branch


def _validity_check(cfg: MarketConfig) -> None:
    # soft guard: the expansion degrades near coupling ~ 1
    if cfg.gamma > 0.5 or cfg.beta / cfg.alpha > 0.5:
        warnings.warn(
            f"expansion outside its small-coupling regime "
            f"(gamma={cfg.gamma}, beta/alpha={cfg.beta / cfg.alpha}); "
            "values are extrapolations", stacklevel=3)


def expansion_order0(cfg: MarketConfig) -> ExpansionResult:
    """Zeroth order: the uniform distribution."""
    p = np.full(cfg.K, 1.0 / cfg.K)
    return ExpansionResult(order=0, K=cfg.K, alpha=cfg.alpha,
                           p_above=p, p_below=p.copy(),
                           branch=_assign_branches(p, p, cfg.alpha, cfg.K),
                           constants={})


def expansion_order1(cfg: MarketConfig) -> ExpansionResult:
    """First order in (gamma, beta/alpha)."""
    _validity_check(cfg)
    K, beta, gamma = cfg.K, cfg.beta, cfg.gamma
    tilt = gamma * np.log(ranking(K))
    den_common = K * (1.0 + 2.0 * gamma * LOG2 - gamma)
    den_above = den_common + beta
    den_below = den_common - beta
    if den_above <= 0 or den_below <= 0:
        raise ValueError("expansion denominator not positive; couplings "
                         "too large for the first-order form")
    p_above = (1.0 + beta / K + tilt) / den_above
    p_below = (1.0 - beta / K + tilt) / den_below
    return ExpansionResult(order=1, K=K, alpha=cfg.alpha,
                           p_above=p_above, p_below=p_below,
                           branch=_assign_branches(p_above, p_below,
                                                   cfg.alpha, K),
                           constants={"den_above": den_above,
                                      "den_below": den_below})


def expansion_order2(cfg: MarketConfig) -> ExpansionResult:
    """Second order in (gamma, beta/alpha).

    The shared constants are B = K*(2*gamma*log2 - gamma + 1) + beta and
    the numerator correction

        c(k) = gamma^2/2 * log(1+k/K)^2
             + beta^2/(2K^2) * (1 + ((K+beta)/(alpha*B))^2)

    giving, with psi_pm(k) = gamma*log(1+k/K) ± beta/K + 1,

        P_(±)(k) = (psi_pm + c) / ( beta*(psi_pm ∓ 1)/alpha + B
                   + gamma^2*K*chi1
                   - beta*gamma/(alpha*B) * (2*K*gamma*chi1 + (K+beta)*chi2) )
    """
    _validity_check(cfg)
    K, alpha, beta, gamma = cfg.K, cfg.alpha, cfg.beta, cfg.gamma
    logeps = np.log(ranking(K))
    B = K * (2.0 * gamma * LOG2 - gamma + 1.0) + beta
    if B == 0:
        raise ValueError("expansion constant B vanished")
    psi_plus = gamma * logeps + beta / K + 1.0
    psi_minus = gamma * logeps - beta / K + 1.0
    num_corr = (0.5 * gamma**2 * logeps**2
                + beta**2 / (2.0 * K**2)
                * (1.0 + ((K + beta) / (alpha * B)) ** 2))
    den_shared = (B + gamma**2 * K * CHI1
                  - beta * gamma / (alpha * B)
                  * (2.0 * K * gamma * CHI1 + (K + beta) * CHI2))
    den_above = beta * (psi_plus - 1.0) / alpha + den_shared
    den_below = beta * (psi_minus + 1.0) / alpha + den_shared
    if np.any(den_above == 0) or np.any(den_below == 0):
        raise ValueError("second-order denominator vanished")
    p_above = (psi_plus + num_corr) / den_above
    p_below = (psi_minus + num_corr) / den_below
    return ExpansionResult(order=2, K=K, alpha=alpha,
                           p_above=p_above, p_below=p_below,
                           branch=_assign_branches(p_above, p_below,
                                                   alpha, K),
                           constants={"B": B, "chi1": CHI1, "chi2": CHI2,
                                      "psi_plus": psi_plus,
                                      "psi_minus": psi_minus})


def acceptance_profile(expansion: ExpansionResult,
                       cfg: MarketConfig) -> AcceptanceProfile:
    """Per-company acceptance probability from an expanded steady state.

    Over-subscribed companies (above branch) accept a given student with
    probability alpha/K: the applicant flow P_k cancels against the
    quota-limited draw v*/v_k.  Under-subscribed companies accept every
    applicant, so there phi_k is the below-branch probability itself.
    """
    if expansion.order < 1:
        raise ValueError("acceptance profile needs an order >= 1 expansion")
    quota = cfg.alpha / cfg.K
    phi = np.where(expansion.branch == BRANCH_ABOVE, quota,
                   np.where(expansion.branch == BRANCH_BELOW,
                            expansion.p_below, quota))
    crossing = np.nonzero(expansion.branch == BRANCH_CROSSING)[0] + 1
    return AcceptanceProfile(phi=phi, crossing_k=crossing)


def elementary_symmetric(values: np.ndarray, order: int) -> float:
    """e_order of the given values by the degree-by-degree recurrence."""
    e = np.zeros(order + 1)
    e[0] = 1.0
    for i, x in enumerate(np.asarray(values, dtype=float)):
        for j in range(min(i + 1, order), 0, -1):
            e[j] += x * e[j - 1]
    return float(e[order])


def analytic_unemployment(phi, a: int, K: int | None = None,
                          normalization: str = "falling") -> float:
    """Closed-form unemployment rate from an acceptance profile.

    Sums prod_j (1 - phi_{k_j}) over all a-subsets of companies via the
    elementary symmetric polynomial e_a(1-phi), then normalizes.  Two
    normalizations are in circulation for this quantity and they differ
    by a factor a!:

      "falling":  e_a / (K*(K-1)*...*(K-a+1))   (the default)
      "mean":     e_a / C(K, a), the plain average over subsets

    Both are exposed; neither is asserted as ground truth here.  The
    Monte Carlo comparison in the test suite records how each fares.
    """
    if isinstance(phi, AcceptanceProfile):
        phi = phi.phi
    phi = np.asarray(phi, dtype=float)
    if K is None:
        K = phi.shape[0]
    if phi.shape != (K,):
        raise ValueError(f"phi must have shape ({K},)")
    if not 1 <= a <= K:
        raise ValueError(f"a must be in 1..{K}")
    if np.any(phi < 0) or np.any(phi > 1):
        raise ValueError("phi entries must lie in [0, 1]")

    e_a = elementary_symmetric(1.0 - phi, a)
    if normalization == "falling":
        denom = 1.0
        for i in range(a):
            denom *= K - i
        return e_a / denom
    if normalization == "mean":
        return e_a / math.comb(K, a)
    raise ValueError(f"unknown normalization {normalization!r}")
