"""Time the compiled and numpy kernel backends on the same inputs.

Usage: ``python benchmarks/bench_kernels.py [--n N] [--d D] [--repeat R]``
"""

import argparse
import timeit

import numpy as np
import scipy.sparse as sp

from sodreduce import _kernels_py, kernels

try:
    from sodreduce import _kernels
except ImportError:
    _kernels = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    g = np.random.default_rng(0)
    n, d = args.n, args.d
    M = g.standard_normal((n, d))
    S = sp.random(n, d, density=0.05, random_state=0, format="csr")
    h, s = g.integers(512, size=n), g.choice([-1.0, 1.0], size=n)
    X, C = g.standard_normal((n // 10, d)), g.standard_normal((20, d))
    cases = {
        "countsketch_dense": lambda impl: kernels.countsketch_rows(h, s, M, 512, impl),
        "countsketch_csr": lambda impl: kernels.countsketch_rows(h, s, S, 512, impl),
        "min_sqdist": lambda impl: kernels.min_sqdist(X, C, impl),
    }
    impls = {"python": _kernels_py}
    if _kernels is not None:
        impls["cython"] = _kernels
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in impls) + "   (ms, best of repeats)")
    for label, fn in cases.items():
        times = [min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)) * 1e3
                 for impl in impls.values()]
        print(f"{label:<20}" + "".join(f"{t:>12.2f}" for t in times))


if __name__ == "__main__":
    main()
