"""Time the compiled kernels against the pure-Python fallback on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel with both timings and the speedup, after
checking that the two backends return identical results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from dqibench import gf, instances, kernels


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    inst = instances.gen_gallager(3, 6, 500, seed=1)
    csc = inst.B.tocsc()
    var_ptr, var_cons = csc.indptr.astype(np.int64), csc.indices.astype(np.int64)
    con_ptr, con_vars = inst.B.indptr.astype(np.int64), inst.B.indices.astype(np.int64)
    rng = np.random.default_rng(0)
    x0 = rng.integers(0, 2, inst.n).astype(np.uint8)
    sat0 = ((inst.B @ x0) % 2 == inst.v).astype(np.uint8)
    u = rng.random(inst.n)
    ones = np.ones(inst.m)

    def anneal(be):
        x, sat = x0.copy(), sat0.copy()
        out = [be.anneal_f2(x, sat, var_ptr, var_cons, ones, 1.0, u, False) for _ in range(5)]
        return out, x

    dense = rng.integers(0, 2, (400, 800)).astype(np.uint8)
    packed0 = gf.pack_rows(dense)

    def rref(be):
        P = packed0.copy()
        piv = be.gf2_rref(P, 800)
        return list(piv), P

    diag = np.arange(2001, dtype=float) * 0.3
    k = np.arange(1, 2001, dtype=float)
    offsq = k * (4000 - k + 1)

    def sturm(be):
        return [be.sturm_count(diag, offsq, float(t)) for t in np.linspace(-200, 1200, 50)]

    order = rng.permutation(inst.n).astype(np.int64)
    fixed = rng.integers(0, 2, inst.n).astype(np.uint8)
    fill = rng.integers(0, 2, inst.n).astype(np.uint8)
    v = inst.v.astype(np.uint8)

    def advrand(be):
        return be.advrand_pass(order, inst.n // 3, fixed, fill, con_ptr, con_vars, var_ptr, var_cons, v)

    return {"anneal_f2 (5 sweeps, n=1500)": anneal, "gf2_rref (400x800)": rref, "sturm_count (50 x size 2001)": sturm, "advrand_pass (n=1500)": advrand}


def same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return a == b


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    native, pure = kernels.load_backend("native"), kernels.load_backend("pure")
    print(f"{'kernel':32s} {'native s':>10s} {'pure s':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        if not same(fn(native), fn(pure)):
            raise SystemExit(f"{name}: backends disagree")
        tn = best_of(lambda: fn(native), args.repeat)
        tp = best_of(lambda: fn(pure), max(1, args.repeat // 3))
        print(f"{name:32s} {tn:10.5f} {tp:10.5f} {tp / tn:8.1f}x")


if __name__ == "__main__":
    main()
