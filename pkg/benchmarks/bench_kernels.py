"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel and workload with the best-of-repeat time of each
backend, their ratio, and the largest disagreement between the results.
"""

import argparse
import timeit

import numpy as np

from ginlab import _pykernels

try:
    from ginlab import _ckernels
except ImportError:
    _ckernels = None


def antisym_stack(rng, batch, n):
    a = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    return a - np.swapaxes(a, 1, 2)


def banded(rng, n, bw):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    i, j = np.indices((n, n))
    a[i - j > bw] = 0
    return a + 4 * np.eye(n)


def conj_pairs(rng, m):
    top = rng.standard_normal(m) + 1j * (np.abs(rng.standard_normal(m)) + 0.01)
    return rng.permutation(np.concatenate([top, top.conj()]))


def pfaffian_case(mod, a):
    m, l = mod.pfaffian_batch(a)
    return m * np.exp(l)


def band_case(mod, a, bw, rhs):
    lu = np.array(a, copy=True, order="C")
    piv = mod.band_lu_factor(lu, bw)
    y = rhs.copy()
    mod.band_lu_forward(lu, piv, bw, y)
    return y


def pairing_case(mod, ev):
    p, _ = mod.pair_conjugates(ev, 1e-9)
    return ev[p]


def workloads(rng):
    for batch, n in ((20_000, 4), (2_000, 12), (50, 60)):
        a = antisym_stack(rng, batch, n)
        yield f"pfaffian {batch}x{n}x{n}", lambda mod, a=a: pfaffian_case(mod, a)
    for n, bw in ((800, 2), (2_000, 4)):
        a = banded(rng, n, bw)
        rhs = rng.standard_normal(n) + 0j
        yield f"band LU n={n} bw={bw}", lambda mod, a=a, bw=bw, rhs=rhs: band_case(mod, a, bw, rhs)
    for m in (200, 2_000):
        ev = conj_pairs(rng, m)
        yield f"conjugate pairing 2x{m}", lambda mod, ev=ev: pairing_case(mod, ev)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'workload':32s} {'compiled':>10s} {'numpy':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fn in workloads(rng):
        ref = fn(_pykernels)
        got = fn(_ckernels)
        diff = float(np.max(np.abs(got - ref) / np.maximum(1.0, np.abs(ref))))
        tc = best(lambda: fn(_ckernels), args.repeat)
        tp = best(lambda: fn(_pykernels), args.repeat)
        print(f"{name:32s} {tc * 1e3:8.2f}ms {tp * 1e3:8.2f}ms {tp / tc:7.1f}x {diff:9.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
