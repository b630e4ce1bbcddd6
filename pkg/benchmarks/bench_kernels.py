"""Compare the compiled and numpy simulation kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times one UUV case-study-sized propagation (25 states, 80000 steps split in
1 s segments) and the disagreement trace, with each backend.
"""
import argparse
import timeit

import numpy as np

from raidd.kernels import _pykernels

try:
    from raidd.kernels import _ckernels
except ImportError:
    _ckernels = None


def workload(mod, Phi, x0, segments, steps):
    z = x0
    for _ in range(segments):
        Y = mod.propagate(Phi, z, steps)
        mod.disagreement(Y, 5, 3)
        z = Y[-1]
    return z


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    # orthogonal, so the state neither blows up nor decays into denormals
    Phi, _ = np.linalg.qr(rng.standard_normal((25, 25)))
    Phi = np.ascontiguousarray(Phi)
    x0 = rng.standard_normal(25)
    segments, steps = 800, 100

    backends = [("numpy", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    results = {}
    for name, mod in backends:
        t = min(timeit.repeat(lambda: workload(mod, Phi, x0, segments, steps),
                              number=1, repeat=args.repeat))
        results[name] = t
        print(f"{name:>7}: {t * 1e3:8.1f} ms for {segments * steps} steps")
    if len(results) == 2:
        a = workload(_pykernels, Phi, x0, segments, steps)
        b = workload(_ckernels, Phi, x0, segments, steps)
        print(f"speedup: {results['numpy'] / results['cython']:.1f}x, "
              f"max state difference {np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()
