"""Time one simulated year under both matching backends.

Run as a script:  python3 benchmarks/bench_year.py [N] [K] [a]

The float work (race keys, priorities) is computed once in NumPy; the
backends differ only in the selection pass, so the outputs must agree
bit for bit and the timing difference is the kernel alone.
"""

import sys
import time

import numpy as np

from matchsim._reference import year_step as numpy_year_step
from matchsim.core import MarketConfig, make_config
from matchsim.microsim import race_keys, year_rng


def one_year_inputs(cfg: MarketConfig, year: int = 1):
    rng = year_rng(cfg.seed, year)
    u_apply = rng.random((cfg.N, cfg.K))
    u_prio = rng.random((cfg.N, cfg.K))
    p = np.full(cfg.K, 1.0 / cfg.K)
    return race_keys(p, u_apply), u_prio


def timeit(fn, *args, repeat: int = 5):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv):
    N = int(argv[1]) if len(argv) > 1 else 100_000
    K = int(argv[2]) if len(argv) > 2 else 50
    a = int(argv[3]) if len(argv) > 3 else 3
    cfg = make_config({"K": K, "N": N, "alpha": 1.0, "beta": 1.0,
                       "gamma": 1.0, "a": a, "seed": 7})
    keys, u_prio = one_year_inputs(cfg)
    v_star, _, _ = cfg.micro_quota()

    t_np, out_np = timeit(numpy_year_step, keys, u_prio, v_star, a)
    print(f"N={N} K={K} a={a} v*={v_star}")
    print(f"numpy    : {t_np * 1e3:8.2f} ms")

    try:
        from matchsim import _kernels
    except ImportError:
        print("compiled : not built (pure-python install)")
        return 0

    t_c, out_c = timeit(_kernels.year_step, keys, u_prio, v_star, a)
    print(f"compiled : {t_c * 1e3:8.2f} ms   ({t_np / t_c:.1f}x)")

    same = all(np.array_equal(x, y) for x, y in zip(out_np, out_c))
    print(f"outputs identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
