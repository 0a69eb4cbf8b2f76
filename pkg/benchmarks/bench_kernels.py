"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 1500] [--repeat 5]

Prints the best-of-``repeat`` wall time per call for each kernel and
backend, and the speed-up of the compiled extension.
"""
import argparse
import timeit

import numpy as np

from svrisk import _kernels as K


def cases(n: int, sweeps: int = 10):
    rng = np.random.default_rng(0)
    h0 = -0.5 + 0.3 * rng.standard_normal(n)
    r = np.exp(h0 / 2) * rng.standard_normal(n)
    z = rng.standard_normal((sweeps, n))
    logu = np.log(rng.random((sweeps, n)))
    x = rng.standard_normal(n)
    return {
        "h_sweep": lambda k: k.h_sweep(h0.copy(), r, -0.5, 0.95, 0.3, -0.6, 20.0, 0.4, z, logu),
        "sv_logjoint": lambda k: k.sv_logjoint(h0, r, -0.5, 0.95, 0.3, -0.6, 20.0),
        "garch_filter": lambda k: k.garch_filter(x, 0.05, 0.1, 0.85, 1.0),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1500, help="series length")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if K.compiled is None:
        raise SystemExit("compiled extension not built; run 'pip install --no-build-isolation -e .'")
    print(f"n = {args.n}, h_sweep runs 10 sweeps per call")
    print(f"{'kernel':<14}{'cython (ms)':>14}{'python (ms)':>14}{'speed-up':>10}")
    for name, call in cases(args.n).items():
        t = {}
        for label, mod in (("cython", K.compiled), ("python", K.python)):
            number = 20 if label == "cython" else 2
            t[label] = min(timeit.repeat(lambda: call(mod), number=number, repeat=args.repeat)) / number
        print(f"{name:<14}{1e3 * t['cython']:>14.3f}{1e3 * t['python']:>14.3f}{t['python'] / t['cython']:>9.1f}x")


if __name__ == "__main__":
    main()
