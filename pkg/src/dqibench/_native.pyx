# cython: language_level=3
"""Compiled twins of the loops in ``_pure``; see that module for semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from libc.stdint cimport uint8_t, uint64_t, int64_t

cnp.import_array()


def gf2_rref(uint64_t[:, ::1] rows, Py_ssize_t pivot_limit):
    cdef Py_ssize_t nrows = rows.shape[0], nwords = rows.shape[1]
    cdef Py_ssize_t col, word, i, j, k, src, rank = 0
    cdef uint64_t bit, tmp
    pivots = []
    for col in range(pivot_limit):
        if rank == nrows:
            break
        word = col >> 6
        bit = (<uint64_t>1) << (col & 63)
        src = -1
        for i in range(rank, nrows):
            if rows[i, word] & bit:
                src = i
                break
        if src < 0:
            continue
        if src != rank:
            for k in range(nwords):
                tmp = rows[rank, k]
                rows[rank, k] = rows[src, k]
                rows[src, k] = tmp
        for j in range(nrows):
            if j != rank and (rows[j, word] & bit):
                for k in range(word, nwords):
                    rows[j, k] ^= rows[rank, k]
        pivots.append(col)
        rank += 1
    return np.asarray(pivots, dtype=np.int64)


def sturm_count(double[::1] diag, double[::1] offsq, double x):
    cdef Py_ssize_t i, n = diag.shape[0]
    cdef double tiny = 1e-300
    cdef double q = diag[0] - x
    cdef Py_ssize_t count
    if q == 0.0:
        q = -tiny
    count = 1 if q < 0.0 else 0
    for i in range(1, n):
        q = (diag[i] - x) - offsq[i - 1] / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def anneal_f2(uint8_t[::1] x, uint8_t[::1] sat, int64_t[::1] var_ptr,
              int64_t[::1] var_cons, double[::1] weights, double beta,
              double[::1] u, bint strict):
    cdef Py_ssize_t n = x.shape[0], j, e, lo, hi
    cdef int64_t c, dsat
    cdef long long accepted = 0, ds_total = 0
    cdef double gain
    cdef bint ok
    for j in range(n):
        lo = var_ptr[j]
        hi = var_ptr[j + 1]
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
            ok = gain >= 0.0 or u[j] < exp(beta * gain)
        if ok:
            x[j] ^= 1
            for e in range(lo, hi):
                sat[var_cons[e]] ^= 1
            accepted += 1
            ds_total += dsat
    return accepted, ds_total


def anneal_fp(int64_t[::1] x, int64_t[::1] y, int64_t[::1] var_ptr,
              int64_t[::1] var_cons, int64_t[::1] var_vals, uint8_t[::1] allowed,
              int64_t p, double[::1] weights, double beta, double[::1] u,
              int64_t[::1] shift, bint strict):
    cdef Py_ssize_t n = x.shape[0], j, e, lo, hi
    cdef int64_t c, r, yc, yn, d, dsat
    cdef long long accepted = 0, ds_total = 0
    cdef double gain
    cdef bint ok
    for j in range(n):
        lo = var_ptr[j]
        hi = var_ptr[j + 1]
        r = shift[j]
        gain = 0.0
        dsat = 0
        for e in range(lo, hi):
            c = var_cons[e]
            yc = y[c]
            yn = (yc + var_vals[e] * r) % p
            d = <int64_t>allowed[c * p + yn] - <int64_t>allowed[c * p + yc]
            gain += 2.0 * weights[c] * d
            dsat += d
        if strict:
            ok = gain > 0.0
        else:
            ok = gain >= 0.0 or u[j] < exp(beta * gain)
        if ok:
            x[j] = (x[j] + r) % p
            for e in range(lo, hi):
                c = var_cons[e]
                y[c] = (y[c] + var_vals[e] * r) % p
            accepted += 1
            ds_total += dsat
    return accepted, ds_total


def advrand_pass(int64_t[::1] order, Py_ssize_t n_fixed, uint8_t[::1] fixed_vals,
                 uint8_t[::1] fill_vals, int64_t[::1] con_ptr, int64_t[::1] con_vars,
                 int64_t[::1] var_ptr, int64_t[::1] var_cons, uint8_t[::1] v):
    cdef Py_ssize_t n = order.shape[0], m = con_ptr.shape[0] - 1
    cdef Py_ssize_t t, j, e, f, c, head = 0, tail = 0
    cdef uint8_t val
    out = np.full(n, 255, dtype=np.uint8)
    cdef uint8_t[::1] x = out
    cnt_arr = np.diff(np.asarray(con_ptr)).astype(np.int64)
    cdef int64_t[::1] open_count = cnt_arr
    par_arr = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[::1] parity = par_arr
    # each constraint enters the queue at most once, so m slots suffice
    q_arr = np.empty(m + 1, dtype=np.int64)
    cdef int64_t[::1] queue = q_arr

    for t in range(n_fixed):
        j = order[t]
        val = fixed_vals[j]
        x[j] = val
        for e in range(var_ptr[j], var_ptr[j + 1]):
            c = var_cons[e]
            open_count[c] -= 1
            parity[c] ^= val
    for c in range(m):
        if open_count[c] == 1:
            queue[tail] = c
            tail += 1
    while head < tail:
        c = queue[head]
        head += 1
        if open_count[c] != 1:
            continue
        for e in range(con_ptr[c], con_ptr[c + 1]):
            j = con_vars[e]
            if x[j] == 255:
                val = v[c] ^ parity[c]
                x[j] = val
                for f in range(var_ptr[j], var_ptr[j + 1]):
                    open_count[var_cons[f]] -= 1
                    parity[var_cons[f]] ^= val
                    if open_count[var_cons[f]] == 1:
                        queue[tail] = var_cons[f]
                        tail += 1
                break
    for j in range(n):
        if x[j] == 255:
            x[j] = fill_vals[j]
    return out
