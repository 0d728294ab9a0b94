"""Time the compiled kernels against the NumPy fallback on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--wardens 8]
"""
import argparse
import importlib
import timeit

import numpy as np

from passcovert.fusion import majority_threshold
from passcovert.piecewise_dep import GOLDEN_RTOL
from passcovert.system import breakpoint_arrays


def cases(M, rng):
    A_C = rng.uniform(0.2, 2.0, M) * 1e-10
    A_J = rng.uniform(0.2, 2.0, M) * 1e-10
    arrs = tuple(np.ascontiguousarray(a) for a in breakpoint_arrays(A_C, A_J, 0.01, 0.04, 4e-15))
    T = majority_threshold(M)
    taus = np.ascontiguousarray(np.linspace(arrs[0][0], arrs[3].max(), 201))
    p = np.ascontiguousarray(rng.uniform(0, 1, M))
    return {
        "esp": lambda k: k.esp(p),
        "poibin_pmf": lambda k: k.poibin_pmf(p),
        "dep_components (201 thresholds)": lambda k: k.dep_components(taus, *arrs, T),
        "min_dep_search (grid 64 + golden)": lambda k: k.min_dep_search(*arrs, T, 64, GOLDEN_RTOL),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    n, _ = timer.autorange()
    return min(timer.repeat(repeat, n)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--wardens", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    fallback = importlib.import_module("passcovert._kernels._fallback")
    try:
        compiled = importlib.import_module("passcovert._kernels._core")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the fallback only")

    print(f"M = {args.wardens}")
    print(f"{'kernel':<36}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, call in cases(args.wardens, np.random.default_rng(args.seed)).items():
        t_py = best_time(lambda: call(fallback), args.repeat)
        if compiled is None:
            print(f"{name:<36}{t_py * 1e6:>14.1f}{'-':>14}{'-':>10}")
            continue
        t_cy = best_time(lambda: call(compiled), args.repeat)
        print(f"{name:<36}{t_py * 1e6:>14.1f}{t_cy * 1e6:>14.1f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
