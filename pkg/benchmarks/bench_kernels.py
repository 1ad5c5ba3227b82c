"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 50,200,800] [--repeat 5]

Each kernel is called once before timing so numba compilation is excluded.
Outputs of the two backends are compared on every input; a mismatch aborts.
An end-to-end NSGA-II run on ZDT1 is timed in two subprocesses, one per
backend, selected through ``TRIBAND_MOGA_NUMBA``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from triband_moga import kernels
from triband_moga._accel import NUMBA_AVAILABLE

CASES = {
    "domination_matrix": lambda F, X: (F,),
    "front_ranks": lambda F, X: (F,),
    "crowding": lambda F, X: (F,),
    "nearest_distances": lambda F, X: (F, X),
    "niche_counts": lambda F, X: (F, 0.1, 1.0),
}

E2E = (
    "import time; from triband_moga.engines import RunConfig, run; "
    "run(RunConfig(algorithm='nsga2', population=20, generations=2, evaluator='zdt1')); "
    "t=time.perf_counter(); "
    "run(RunConfig(algorithm='nsga2', population=50, generations=150, evaluator='zdt1', seed=1)); "
    "print(time.perf_counter()-t)"
)


def best_of(fn, args, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,200,800")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--objectives", type=int, default=3)
    ap.add_argument("--no-e2e", action="store_true", help="skip the end-to-end runs")
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':<18} {'n':>5} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        F = rng.random((n, args.objectives))
        X = rng.random((max(n // 2, 1), args.objectives))
        for name, make_args in CASES.items():
            a = make_args(F, X)
            f_nb = getattr(kernels, f"_{name}_numba")
            f_np = getattr(kernels, f"_{name}_numpy")
            r_nb, r_np = f_nb(*a), f_np(*a)  # warm-up and parity check
            if not np.array_equal(r_nb, r_np):
                print(f"{name}: backends disagree at n={n}", file=sys.stderr)
                return 2
            t_np = best_of(f_np, a, args.repeat)
            t_nb = best_of(f_nb, a, args.repeat)
            print(f"{name:<18} {n:>5} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} "
                  f"{t_np / max(t_nb, 1e-12):>8.1f}")

    if not args.no_e2e:
        print("\nNSGA-II on ZDT1, N=50, G=150 (seconds, warm):")
        for flag, label in (("0", "numpy"), ("1", "numba")):
            env = dict(os.environ, TRIBAND_MOGA_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", E2E], env=env,
                                 capture_output=True, text=True, check=True)
            print(f"  {label:<6} {float(out.stdout):.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
