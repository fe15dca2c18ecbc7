"""Exact predictions from the dual code's weight distribution (binary case).

When low-weight dual codewords exist, the DQI state's norm and expected
objective are no longer given by the tridiagonal form.  They become
quadratic forms whose kernels depend on the counts A_k of dual codewords of
each Hamming weight (planted instances) or on the instance's actual v
(general instances, small m only).  This module also holds the codeword
enumerator, the ball-overlap quantity zeta, and two large-m heuristics.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from . import gf
from .errors import CapacityError, NumericError, ParameterError

MAX_DUAL_DIM = 26


@dataclass(frozen=True)
class DualWeightDistribution:
    m: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != self.m + 1:
            raise ParameterError("need one count per weight 0..m")
        if self.counts[0] != 1:
            raise ParameterError("the zero codeword must be counted exactly once")

    @property
    def d_min(self) -> int | None:
        """Smallest nonzero weight, or None for the trivial code."""
        return next((k for k in range(1, self.m + 1) if self.counts[k]), None)

    @property
    def size(self) -> int:
        return sum(self.counts)

    def to_json(self) -> list[int]:
        return list(self.counts)


# ---------------------------------------------------------------- enumeration

def _to_mask(vec) -> int:
    return sum(1 << int(i) for i in np.flatnonzero(vec))


def enumerate_dual(BT, max_dim: int = MAX_DUAL_DIM) -> Iterator[int]:
    """Yield every c with B^T c = 0 over F_2, as an int bitmask over m positions.

    Consecutive words differ by one basis vector (Gray-code order).
    """
    BT = np.asarray(BT.toarray() if hasattr(BT, "toarray") else BT)
    basis = [_to_mask(b) for b in gf.nullspace_basis(BT, 2)]
    if len(basis) > max_dim:
        raise CapacityError(f"dual code has dimension {len(basis)}, above the enumeration budget {max_dim}")
    c = 0
    yield c
    for i in range(1, 1 << len(basis)):
        c ^= basis[(i & -i).bit_length() - 1]
        yield c


def weight_distribution(codewords, m: int) -> DualWeightDistribution:
    counts = [0] * (m + 1)
    for c in codewords:
        counts[int(c).bit_count() if isinstance(c, (int, np.integer)) else int(np.count_nonzero(c))] += 1
    return DualWeightDistribution(m, tuple(counts))


def dual_distribution(inst, max_dim: int = MAX_DUAL_DIM) -> DualWeightDistribution:
    """Weight distribution of ker(B^T) for a binary instance."""
    if inst.p != 2:
        raise ParameterError("weight distributions are implemented for p = 2 only")
    return weight_distribution(enumerate_dual(inst.BT, max_dim), inst.m)


# ---------------------------------------------------------------- kernels

def pair_count(k1: int, k2: int, k: int, m: int) -> int:
    """Number of pairs (y1, y2) with |y1| = k1, |y2| = k2 and y1 + y2 equal to a fixed weight-k word."""
    if not (0 <= k1 <= m and 0 <= k2 <= m and 0 <= k <= m):
        return 0
    if (k1 + k2 - k) % 2:
        return 0
    s = (k1 + k2 - k) // 2
    if s < 0 or s > min(k1, k2):
        return 0
    return math.comb(m - k, s) * math.comb(k, k1 - s)


def _normalize(num, ci: int, cj: int) -> float:
    """num / sqrt(ci cj) with exact integer input where possible."""
    if num == 0:
        return 0.0
    if isinstance(num, int):
        if ci == cj:
            return num / ci
        try:
            return num / math.sqrt(ci * cj)
        except OverflowError:
            sign = 1 if num > 0 else -1
            return sign * math.exp(math.log(abs(num)) - 0.5 * (math.log(ci) + math.log(cj)))
    return float(num) / math.sqrt(float(ci) * float(cj))


def _counts(A, m: int) -> list:
    counts = A.counts if isinstance(A, DualWeightDistribution) else list(A)
    if len(counts) != m + 1:
        raise ParameterError(f"need m+1 = {m + 1} weight counts, got {len(counts)}")
    if all(isinstance(a, (int, np.integer)) for a in counts):
        return [int(a) for a in counts]
    return [float(a) for a in counts]


def _accumulate(terms, exact: bool):
    return sum(terms) if exact else math.fsum(terms)


def gram_matrix(m: int, l: int, A) -> np.ndarray:
    """Gram matrix R of the normalized weight-shell states of a planted instance.

    The DQI state with shell weights w has squared norm w^T R w.
    """
    if not 0 <= l < m:
        raise ParameterError(f"need 0 <= l < m (got l={l}, m={m})")
    A = _counts(A, m)
    exact = isinstance(A[0], int) and m <= 64
    R = np.zeros((l + 1, l + 1))
    for i in range(l + 1):
        for j in range(i, l + 1):
            terms = []
            for s in range(min(i, j) + 1):
                k = i + j - 2 * s
                if k <= m and A[k]:
                    terms.append(math.comb(m - k, s) * math.comb(k, i - s) * A[k])
            R[i, j] = R[j, i] = _normalize(_accumulate(terms, exact), math.comb(m, i), math.comb(m, j))
    return R


def expectation_matrix(m: int, l: int, A) -> np.ndarray:
    """Matrix E with <s> = m/2 + w^T E w for a planted instance and w^T R w = 1."""
    if not 0 <= l < m:
        raise ParameterError(f"need 0 <= l < m (got l={l}, m={m})")
    A = _counts(A, m)
    exact = isinstance(A[0], int) and m <= 64
    E = np.zeros((l + 1, l + 1))
    for i in range(l + 1):
        for j in range(i, l + 1):
            terms = []
            for k in range(min(m, i + j + 1) + 1):
                if not A[k]:
                    continue
                t = (m - k) * pair_count(i, j, k + 1, m) + k * pair_count(i, j, k - 1, m)
                if t:
                    terms.append(A[k] * t)
            num = _accumulate(terms, exact)
            E[i, j] = E[j, i] = 0.5 * _normalize(num, math.comb(m, i), math.comb(m, j))
    return E


def optimal_fraction_exact(m: int, l: int, A) -> tuple[float, np.ndarray]:
    """Maximize <s> over shell weights via the pencil E w = lam R w.

    Returns (<s>, w) with w^T R w = 1 and w_0 >= 0.
    """
    R = gram_matrix(m, l, A)
    E = expectation_matrix(m, l, A)
    try:
        vals, vecs = scipy.linalg.eigh(E, R)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Gram matrix is not positive definite: {exc}") from exc
    w = vecs[:, -1]
    nz = np.flatnonzero(np.abs(w) > 1e-300)
    if nz.size and w[nz[0]] < 0:
        w = -w
    return m / 2 + float(vals[-1]), w


# ---------------------------------------------------------------- instance-level matrices

MAX_SHELL_M = 20


def _shell_syndromes(inst, kmax: int) -> list[dict[int, int]]:
    """For each weight k <= kmax: map syndrome B^T y -> sum of (-1)^(v.y) over |y| = k."""
    m = inst.m
    rows = [_to_mask(r) for r in inst.dense()]
    v = [int(a) for a in inst.v]
    shells = []
    for k in range(kmax + 1):
        acc: dict[int, int] = {}
        for comb in itertools.combinations(range(m), k):
            syn = 0
            sign = 0
            for i in comb:
                syn ^= rows[i]
                sign ^= v[i]
            acc[syn] = acc.get(syn, 0) + (-1 if sign else 1)
        shells.append(acc)
    return shells


def _check_shell_budget(inst, l: int) -> None:
    if inst.p != 2:
        raise ParameterError("shell matrices are implemented for p = 2 only")
    if inst.m > MAX_SHELL_M:
        raise CapacityError(f"m = {inst.m} exceeds the shell-sum budget of {MAX_SHELL_M}")
    if not 0 <= l < inst.m:
        raise ParameterError("need 0 <= l < m")


def m_matrix(inst, l: int, kmax: int | None = None) -> np.ndarray:
    """Squared-norm kernel: sum over |y| = k, |y'| = k' of (-1)^(v.(y+y')) [B^T y = B^T y'].

    ``kmax`` (default l) sets the largest shell index; pass l + 1 to get the
    extension used by the recombination identity.
    """
    _check_shell_budget(inst, l)
    kmax = l if kmax is None else kmax
    shells = _shell_syndromes(inst, kmax)
    m = inst.m
    M = np.zeros((kmax + 1, kmax + 1))
    for k in range(kmax + 1):
        for kk in range(k, kmax + 1):
            a, b = shells[k], shells[kk]
            if len(a) > len(b):
                a, b = b, a
            num = sum(cnt * b.get(syn, 0) for syn, cnt in a.items())
            M[k, kk] = M[kk, k] = _normalize(num, math.comb(m, k), math.comb(m, kk))
    return M


def abar_matrix(inst, l: int) -> np.ndarray:
    """Objective kernel: <f> = w^T Abar w / w^T M w for any v."""
    _check_shell_budget(inst, l)
    shells = _shell_syndromes(inst, l)
    m = inst.m
    rows = [_to_mask(r) for r in inst.dense()]
    v = [int(a) for a in inst.v]
    Abar = np.zeros((l + 1, l + 1))
    for k in range(l + 1):
        for kk in range(l + 1):
            a, b = shells[k], shells[kk]
            num = 0
            for i in range(m):
                part = sum(cnt * b.get(syn ^ rows[i], 0) for syn, cnt in a.items())
                num += -part if v[i] else part
            Abar[k, kk] = _normalize(num, math.comb(m, k), math.comb(m, kk))
    return Abar


# ---------------------------------------------------------------- zeta

@dataclass(frozen=True)
class ZetaEstimate:
    values: tuple[float, ...]
    mode: str

    @property
    def zeta(self) -> float:
        return max(self.values)


def zeta_from_distribution(m: int, l: int, A) -> ZetaEstimate:
    """Average count of nonzero dual codewords within l+1 of a weight-k string, k = 0..l."""
    A = _counts(A, m)
    values = []
    for k in range(l + 1):
        total = 0
        for j in range(1, m + 1):
            if not A[j]:
                continue
            t_lo = max(0, math.ceil((k + j - l - 1) / 2), k - (m - j))
            inner = sum(math.comb(j, t) * math.comb(m - j, k - t) for t in range(t_lo, min(k, j) + 1))
            total += A[j] * inner
        values.append(total / math.comb(m, k))
    return ZetaEstimate(tuple(values), "exact")


def zeta_exact(inst, l: int, cap: int = 10**12) -> ZetaEstimate:
    """zeta_0..zeta_l for a binary instance by enumerating its dual code."""
    if inst.p != 2:
        raise ParameterError("zeta is implemented for p = 2 only")
    dim = inst.m - gf.rank(inst.BT.toarray(), 2)
    work = math.comb(inst.m, l) * (1 << min(dim, 4096))
    if dim > MAX_DUAL_DIM or work > cap:
        raise CapacityError(f"zeta needs C(m,l) * |dual| = {work:.3e}, above cap {cap:.3e}")
    return zeta_from_distribution(inst.m, l, dual_distribution(inst))


def binary_entropy(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    xi = x[inside]
    out[inside] = -xi * np.log2(xi) - (1 - xi) * np.log2(1 - xi)
    return out


def _xh(a, b):
    """a * h(b / a), taken as 0 when a = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    safe = np.where(a > 0, a, 1.0)
    return np.where(a > 0, a * binary_entropy(b / safe), 0.0)


def _inner_overlap_max(m: int, k: int, j: np.ndarray, t_lo: np.ndarray) -> np.ndarray:
    """max over integer t in [t_lo, min(k, j)] of j h(t/j) + (m-j) h((k-t)/(m-j)).

    The objective is concave in t, so the integer maximum sits next to the
    continuous maximizer k j / m or at an end of the range.
    """
    t_hi = np.minimum(k, j).astype(float)
    t_lo = np.maximum(t_lo, np.maximum(0, k - (m - j))).astype(float)
    best = np.full(j.shape, -np.inf)
    star = k * j / m
    for cand in (np.floor(star), np.ceil(star), t_lo, t_hi):
        t = np.clip(cand, t_lo, t_hi)
        val = _xh(j, t) + _xh(m - j, k - t)
        best = np.where(t_lo <= t_hi, np.maximum(best, val), best)
    return best


def zeta_heuristic_log2(m: int, n: int, l: int, k: int, c: float = 0.9) -> float:
    """Counting upper bound on log2 E[zeta_k] assuming A_j <= 2^(-c n) C(m, j).

    The outer maximum runs over integer j in [l, l+k]; the inner one over
    integer t >= (k + j - l)/2.  log2(k) is read as 0 at k = 0.
    """
    if not (0 <= k <= l < m):
        raise ParameterError("need 0 <= k <= l < m")
    j = np.arange(l, min(l + k, m) + 1)
    t_lo = np.ceil((k + j - l) / 2)
    inner = _inner_overlap_max(m, k, j, t_lo)
    outer = -c * n + m * binary_entropy(j / m) + math.log2(max(k, 1)) + inner
    return float(-m * binary_entropy(k / m) + math.log2(l + k if l + k > 0 else 1) + np.max(outer))


def zeta_heuristic_profile(m: int, n: int, l: int, c: float = 0.9) -> ZetaEstimate:
    """zeta_heuristic_log2 for every k = 0..l."""
    return ZetaEstimate(tuple(zeta_heuristic_log2(m, n, l, k, c) for k in range(l + 1)), "heuristic-log2")


def gallager_weight_bound(m: int, n: int, s: int, j: int, c0: float = math.sqrt(2 * math.pi)) -> tuple[float, bool]:
    """log2 bound on the probability that a weight-j word is a dual codeword of a regular code.

    Returns the bound and whether (1 - 2j/m)^s has dropped below 0.05.
    """
    if not 0 < j < m:
        raise ParameterError("need 0 < j < m")
    decay = (1 - 2 * j / m) ** s
    return -n * (1 - decay - (s / m) * math.log2(c0 * math.sqrt(m))), decay < 0.05
