"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, size) with the best-of-``repeat`` wall time
for each backend and the speed-up.
"""

import argparse
import time

import numpy as np

from l1ae import kernels
from l1ae.decoders.lp import l1_min_pos


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def jacobi_case(n, seed=0):
    M = np.random.default_rng(seed).standard_normal((n, n + 5))
    S = M @ M.T
    return lambda backend: kernels.jacobi_eigh(S, backend=backend)


def lp_case(m, d, k, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.normal(0.0, 1.0 / np.sqrt(m), (m, d))
    x = np.zeros(d)
    x[rng.choice(d, k, replace=False)] = 1.0 - rng.random(k)
    y = A @ x
    return lambda backend: l1_min_pos(A, y, backend=backend)


CASES = [
    ("jacobi", "n=20", jacobi_case(20)),
    ("jacobi", "n=50", jacobi_case(50)),
    ("jacobi", "n=100", jacobi_case(100)),
    ("simplex", "m=20 d=200", lp_case(20, 200, 3)),
    ("simplex", "m=50 d=1000", lp_case(50, 1000, 10)),
]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the python backend is timed")
    print(f"{'kernel':<9}{'size':<14}" + "".join(f"{b + ' ms':>12}" for b in backends)
          + ("  speed-up" if len(backends) == 2 else ""))
    for name, size, case in CASES:
        times = [best_time(lambda b=b: case(b), args.repeat) * 1e3 for b in backends]
        line = f"{name:<9}{size:<14}" + "".join(f"{t:>12.2f}" for t in times)
        if len(times) == 2:
            line += f"  {times[1] / times[0]:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
