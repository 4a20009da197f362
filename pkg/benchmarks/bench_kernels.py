"""Time the numba kernels against their numpy twins, then the analytic
propagator against the split-step oracle.

    python3 benchmarks/bench_kernels.py [--sizes 4096 65536] [--repeats 20]
"""
import argparse
import timeit

import numpy as np

from qatchain import (Grid, LsodeSpec, OracleConfig, Schedule, Segment,
                      chain_evolve_direct, ho_eigenstate, oracle_evolve)
from qatchain._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def kernel_cases(n, rng):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    x = np.linspace(-20, 20, n)
    phase = np.exp(1j * x)
    k = np.linspace(-5, 5, 256)
    c = rng.normal(size=256) + 0j
    xs = x[: max(16, n // 16)]
    return {
        "hermite(n=40)": lambda K: K["hermite"](40, x),
        "quadratic_phase": lambda K: K["quadratic_phase"](psi, x, 0.3, 1.1),
        "raw_moments": lambda K: K["raw_moments"](psi, x),
        "central_moments": lambda K: K["central_moments"](psi, x, 0.1),
        "multiply_inplace": lambda K: K["multiply_inplace"](psi.copy(), phase),
        "trig_eval(256 modes)": lambda K: K["trig_eval"](c, k, xs),
    }


def best_of(fn, repeats):
    fn()  # warm-up (and JIT compilation)
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def bench_kernels(sizes, repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22} {'N':>8} {'numpy_ms':>10} {'numba_ms':>10} {'ratio':>7}")
    for n in sizes:
        for name, call in kernel_cases(n, rng).items():
            t_np = best_of(lambda: call(NUMPY_KERNELS), repeats)
            if NUMBA_KERNELS:
                t_nb = best_of(lambda: call(NUMBA_KERNELS), repeats)
                print(f"{name:<22} {n:>8} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} "
                      f"{t_np / t_nb:>6.1f}x")
            else:
                print(f"{name:<22} {n:>8} {t_np * 1e3:>10.3f} {'n/a':>10}")


def bench_propagation(durations):
    grid = Grid.symmetric(700.0, 4096)
    init = ho_eigenstate(0, LsodeSpec(omega=1.0), 0.0, grid)
    print(f"\n{'free duration':>13} {'analytic_ms':>12} {'oracle_s':>9} {'speedup':>8}")
    for d in durations:
        sched = Schedule((Segment.free(d),))
        t_a = best_of(lambda: chain_evolve_direct(sched, init, samples_per_segment=0), 3)
        t_o = best_of(lambda: oracle_evolve(OracleConfig(richardson=False), sched, init), 1)
        print(f"{d:>13g} {t_a * 1e3:>12.2f} {t_o:>9.2f} {t_o / t_a:>7.0f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 65536])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--durations", type=float, nargs="+", default=[1, 10, 50])
    ap.add_argument("--skip-propagation", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.sizes, args.repeats)
    if not args.skip_propagation:
        bench_propagation(args.durations)


if __name__ == "__main__":
    main()
