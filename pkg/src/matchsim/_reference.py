"""NumPy implementation of the matching-year kernel.

Semantics contract shared with the compiled kernel in _kernels.pyx:

* keys[i, k] are precomputed race keys; student i applies to the a
  companies with the smallest keys (ties by smaller company index).
* u_prio[i, k] is student i's lottery priority at company k; an
  over-subscribed company keeps the v_star applicants with the smallest
  priorities (ties by smaller student index).
* each student joins the highest-index company that accepted them.

All comparisons are tie-broken deterministically so both kernels return
identical arrays for identical inputs.
"""

from __future__ import annotations

import numpy as np


def year_step(keys: np.ndarray, u_prio: np.ndarray, v_star: int, a: int):
    """One matching year.

    Returns (v, s, chosen): per-company sheet counts (int64, shape (K,)),
    the acceptance mask (uint8, shape (N, K)) and each student's company
    (int32, shape (N,), -1 when rejected everywhere).
    """
    keys = np.ascontiguousarray(keys, dtype=np.float64)
    u_prio = np.ascontiguousarray(u_prio, dtype=np.float64)
    if keys.shape != u_prio.shape or keys.ndim != 2:
        raise ValueError("keys and u_prio must share shape (N, K)")
    N, K = keys.shape
    if not 1 <= a <= K:
        raise ValueError("a must be in 1..K")
    if v_star < 0:
        raise ValueError("v_star must be non-negative")

    applied = sheets_from_keys(keys, a)
    v = applied.sum(axis=0).astype(np.int64)
    s = lottery(applied, u_prio, v_star)
    chosen = resolve(s)
    return v, s.astype(np.uint8), chosen


def sheets_from_keys(keys: np.ndarray, a: int) -> np.ndarray:
    """Boolean application mask: the a smallest keys per row."""
    N, K = keys.shape
    if a == K:
        return np.ones((N, K), dtype=bool)
    # stable sort so equal keys resolve to the smaller company index
    order = np.argsort(keys, axis=1, kind="stable")
    mask = np.zeros((N, K), dtype=bool)
    np.put_along_axis(mask, order[:, :a], True, axis=1)
    return mask


def lottery(applied: np.ndarray, u_prio: np.ndarray, v_star: int) -> np.ndarray:
    """Quota-limited acceptance per company."""
    N, K = applied.shape
    s = np.zeros((N, K), dtype=bool)
    if v_star <= 0:
        return s
    for k in range(K):
        idx = np.nonzero(applied[:, k])[0]
        if idx.size <= v_star:
            s[idx, k] = True
        else:
            order = np.argsort(u_prio[idx, k], kind="stable")
            s[idx[order[:v_star]], k] = True
    return s


def resolve(s: np.ndarray) -> np.ndarray:
    """Highest accepting company per student, -1 when none."""
    N, K = s.shape
    got_any = s.any(axis=1)
    last = K - 1 - np.argmax(s[:, ::-1], axis=1)
    return np.where(got_any, last, -1).astype(np.int32)
