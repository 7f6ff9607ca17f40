"""Time the compiled orbit-distance kernel against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 1000 10000 100000]

Inputs are the ones the library itself builds for the orbit of a block
sequence of support 512 under the geometric and power matrices.  Both kernels are checked to agree before timing.
"""

import argparse
import timeit

import numpy as np

from kothe_chaos import _kernels_py
from kothe_chaos.kothe_space import KotheSpace, _choose_truncation, _unique_columns
from kothe_chaos.matrices import GeometricMatrix, PowerMatrix
from kothe_chaos.sequences import Blocks

try:
    from kothe_chaos import _kernels as compiled
except ImportError:
    compiled = None


def kernel_inputs(space: KotheSpace, n: int, support: int = 512):
    """The arrays orbit_distance_bounds would hand to the kernel for n shifts."""
    w = Blocks([(0, support // 3, 1.0), (support // 2, support, -2.0)])
    K = space.n_terms
    J, coltail = _choose_truncation(w, space, list(range(1, K + 1)), w.sup_bound(1))
    raw = np.abs(w.values(1, n + J - 1))
    absw = raw if space.p in (0, 1) else raw ** space.p
    weights = np.asarray(space.matrix.block(1, J, K), dtype=float)
    if space.p not in (0, 1):
        weights = weights ** space.p
    coef = 0.5 ** np.arange(1, K + 1)
    ct = np.zeros(K) if coltail is None else coltail
    uw, ut, ucoef = _unique_columns(weights, ct, coef)
    tailfac = np.zeros(n)
    return (np.ascontiguousarray(absw), uw, ucoef, ut, tailfac, float(space.p), space.discarded, n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernel not built; only the numpy path is timed")
    cases = [("geometric(0.5), p=1", KotheSpace(GeometricMatrix(0.5), 1.0)),
             ("power, p=1", KotheSpace(PowerMatrix(), 1.0, tol=1e-6)),
             ("power, p=0", KotheSpace(PowerMatrix(), 0.0, tol=1e-6))]
    print(f"{'case':22s} {'n':>8s} {'J x C':>10s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for label, space in cases:
        for n in args.sizes:
            inp = kernel_inputs(space, n)
            shape = f"{inp[1].shape[0]}x{inp[1].shape[1]}"
            t_py = min(timeit.repeat(lambda: _kernels_py.orbit_distances(*inp), number=1,
                                     repeat=args.repeat)) * 1e3
            if compiled is None:
                print(f"{label:22s} {n:8d} {shape:>10s} {t_py:10.2f} {'-':>10s} {'-':>8s}")
                continue
            a, b = compiled.orbit_distances(*inp), _kernels_py.orbit_distances(*inp)
            if not (np.allclose(a[0], b[0], rtol=1e-12, atol=1e-15)
                    and np.allclose(a[1], b[1], rtol=1e-12, atol=1e-15)):
                raise SystemExit(f"kernels disagree on {label}, n={n}")
            t_c = min(timeit.repeat(lambda: compiled.orbit_distances(*inp), number=1,
                                    repeat=args.repeat)) * 1e3
            print(f"{label:22s} {n:8d} {shape:>10s} {t_py:10.2f} {t_c:10.2f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
