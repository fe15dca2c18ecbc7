"""Pure-Python implementations of the hot inner loops.

Every function here has a compiled twin in ``_native.pyx`` with the same
signature and the same consumption of random inputs, so both backends yield
bit-identical results.  Arrays are modified in place where documented.
"""
from __future__ import annotations

import math

import numpy as np


def gf2_rref(rows: np.ndarray, pivot_limit: int) -> np.ndarray:
    """Reduce bit-packed rows to reduced row-echelon form in place.

    ``rows`` is a C-contiguous uint64 array of shape (r, words); column c
    lives in word c // 64 at bit c % 64.  Pivots are taken among the first
    ``pivot_limit`` columns only, first nonzero row in column order.
    Returns the pivot columns; after the call row i holds pivot i.
    """
    nrows = rows.shape[0]
    pivots = []
    rank = 0
    for col in range(pivot_limit):
        if rank == nrows:
            break
        word = col >> 6
        bit = np.uint64(1 << (col & 63))
        hits = np.flatnonzero(rows[rank:, word] & bit)
        if hits.size == 0:
            continue
        src = rank + int(hits[0])
        if src != rank:
            rows[[rank, src]] = rows[[src, rank]]
        mask = (rows[:, word] & bit) != 0
        mask[rank] = False
        if mask.any():
            rows[mask, word:] ^= rows[rank, word:]
        pivots.append(col)
        rank += 1
    return np.asarray(pivots, dtype=np.int64)


def sturm_count(diag: np.ndarray, offsq: np.ndarray, x: float) -> int:
    """Number of eigenvalues strictly below ``x`` of a symmetric tridiagonal.

    ``offsq`` holds squared off-diagonal entries.
    """
    tiny = 1e-300
    q = float(diag[0]) - x
    if q == 0.0:
        q = -tiny
    count = 1 if q < 0.0 else 0
    for i in range(1, diag.shape[0]):
        q = (float(diag[i]) - x) - float(offsq[i - 1]) / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def anneal_f2(x, sat, var_ptr, var_cons, weights, beta, u, strict):
    """One in-order Metropolis sweep over all binary variables.

    ``sat[c]`` tracks whether constraint c is currently satisfied.  The move
    gain is measured in units of the +/-1 objective, scaled per constraint by
    ``weights``.  ``u[j]`` is the uniform draw reserved for variable j.
    Returns (accepted moves, change in satisfied count).
    """
    n = x.shape[0]
    accepted = 0
    ds_total = 0
    for j in range(n):
        lo, hi = var_ptr[j], var_ptr[j + 1]
        gain = 0.0
        dsat = 0
        for e in range(lo, hi):
            c = var_cons[e]
            if sat[c]:
                gain -= weights[c]
                dsat -= 1
            else:
                gain += weights[c]
                dsat += 1
        gain *= 2.0
        if strict:
            ok = gain > 0.0
        else:
            ok = gain >= 0.0 or u[j] < math.exp(beta * gain)
        if ok:
            x[j] ^= 1
            for e in range(lo, hi):
                sat[var_cons[e]] ^= 1
            accepted += 1
            ds_total += dsat
    return accepted, ds_total


def anneal_fp(x, y, var_ptr, var_cons, var_vals, allowed, p, weights, beta, u, shift, strict):
    """Single-symbol Metropolis sweep over F_p variables.

    ``y[c]`` caches b_c . x mod p and ``allowed`` is the flattened (m, p)
    indicator table of the satisfying sets.  Variable j proposes
    x_j + shift[j].  Returns (accepted moves, change in satisfied count).
    """
    n = x.shape[0]
    accepted = 0
    ds_total = 0
    for j in range(n):
        lo, hi = var_ptr[j], var_ptr[j + 1]
        r = shift[j]
        gain = 0.0
        dsat = 0
        for e in range(lo, hi):
            c = var_cons[e]
            yc = y[c]
            yn = (yc + var_vals[e] * r) % p
            d = int(allowed[c * p + yn]) - int(allowed[c * p + yc])
            gain += 2.0 * weights[c] * d
            dsat += d
        if strict:
            ok = gain > 0.0
        else:
            ok = gain >= 0.0 or u[j] < math.exp(beta * gain)
        if ok:
            x[j] = (x[j] + r) % p
            for e in range(lo, hi):
                c = var_cons[e]
                y[c] = (y[c] + var_vals[e] * r) % p
            accepted += 1
            ds_total += dsat
    return accepted, ds_total


def advrand_pass(order, n_fixed, fixed_vals, fill_vals, con_ptr, con_vars, var_ptr, var_cons, v):
    """Fix, propagate, fill: one binary assignment.

    The first ``n_fixed`` variables of ``order`` take ``fixed_vals``.  Then
    constraints with exactly one open variable are queued in index order and
    forced to be satisfied; constraints that drop to one open variable during
    propagation join the back of the queue.  Leftover variables take
    ``fill_vals``.  Returns the assignment as uint8.
    """
    n = order.shape[0]
    m = con_ptr.shape[0] - 1
    x = np.full(n, 255, dtype=np.uint8)
    open_count = np.diff(con_ptr).astype(np.int64)
    parity = np.zeros(m, dtype=np.uint8)

    def assign(j, val, queue):
        x[j] = val
        for e in range(var_ptr[j], var_ptr[j + 1]):
            c = var_cons[e]
            open_count[c] -= 1
            parity[c] ^= val
            if queue is not None and open_count[c] == 1:
                queue.append(c)

    for t in range(n_fixed):
        j = order[t]
        assign(j, fixed_vals[j], None)
    queue = [c for c in range(m) if open_count[c] == 1]
    head = 0
    while head < len(queue):
        c = queue[head]
        head += 1
        if open_count[c] != 1:
            continue
        for e in range(con_ptr[c], con_ptr[c + 1]):
            j = con_vars[e]
            if x[j] == 255:
                assign(j, v[c] ^ parity[c], queue)
                break
    for j in range(n):
        if x[j] == 255:
            x[j] = fill_vals[j]
    return x
