"""Time the compiled and pure-numpy string-variance kernels.

    python benchmarks/bench_kernels.py [--sizes 16 32 64] [--repeat 3]

Inputs are real free-fermion tables (time-averaged generator of the TFI
chain), so the workload matches what ``qfi_product_state_ff`` does.
"""
import argparse
import time

import numpy as np

from shotnoise import _kernels
from shotnoise.freefermion import eta_table, single_site_table


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if _kernels.compiled_string_variance is None:
        print("compiled kernel not available; only timing the fallback")
    table = single_site_table(np.pi / 2, 0.3)
    print(f"{'N':>4} {'strings':>8} {'python_s':>10} {'cython_s':>10} {'speedup':>8} {'rel_diff':>9}")
    for n in args.sizes:
        terms = eta_table(2.0, 5.0, 0.5, n, averaged=True).pauli_terms()
        tp, vp = best_of(_kernels.python_string_variance, (*terms, table), args.repeat)
        if _kernels.compiled_string_variance is None:
            print(f"{n:>4} {len(terms[0]):>8} {tp:>10.4f} {'-':>10} {'-':>8} {'-':>9}")
            continue
        tc, vc = best_of(_kernels.compiled_string_variance, (*terms, table), args.repeat)
        print(f"{n:>4} {len(terms[0]):>8} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.1f} {abs(vp - vc) / abs(vp):>9.1e}")


if __name__ == "__main__":
    main()
