"""Syndrome decoders and their benchmarks.

* ``bw_decode``: Berlekamp-Welch for the Reed-Solomon dual of a
  Vandermonde instance.
* ``bp_decode``: flooding sum-product (or min-sum) on the Tanner graph of
  B^T, binary case.
* ``failure_rate`` estimates how often a decoder misses a random
  weight-l error; ``density_evolution_threshold`` estimates the largest
  flip rate BP can correct asymptotically.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.stats import binomtest

from . import gf
from .errors import GateError, NumericError, ParameterError
from .instances import DegreeDistribution, MaxLinsatInstance, primitive_element
from .rng import substream

SUCCESS = "success"
FAILURE = "failure"
AMBIGUOUS = "detected-ambiguity"


@dataclass
class DecodeOutcome:
    status: str
    error: np.ndarray | None
    iterations: int
    residual_weight: int = 0

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS


# ---------------------------------------------------------------- polynomials over F_p
# coefficient lists, lowest degree first

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_divmod(num: list[int], den: list[int], p: int) -> tuple[list[int], list[int]]:
    num, den = _trim(list(num)), _trim(list(den))
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(den[-1], -1, p)
    quot = [0] * max(0, len(num) - len(den) + 1)
    rem = list(num)
    for shift in range(len(num) - len(den), -1, -1):
        coef = rem[shift + len(den) - 1] * inv % p
        quot[shift] = coef
        if coef:
            for i, d in enumerate(den):
                rem[shift + i] = (rem[shift + i] - coef * d) % p
    return _trim(quot), _trim(rem[: len(den) - 1])


def poly_eval(coeffs: list[int], x: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


# ---------------------------------------------------------------- Berlekamp-Welch

def opi_points(inst: MaxLinsatInstance) -> np.ndarray:
    """Evaluation points a_i with B_ij = a_i^j, checked against the matrix."""
    p, m, n = inst.p, inst.m, inst.n
    if m != p - 1:
        raise ParameterError("not a Vandermonde instance: need m = p - 1")
    g = inst.meta.get("params", {}).get("gamma", primitive_element(p))
    pts = np.array([pow(g, i, p) for i in range(m)], dtype=np.int64)
    expect = np.array([[pow(int(a), j, p) for j in range(n)] for a in pts], dtype=np.int64)
    if not np.array_equal(inst.dense() % p, expect):
        raise ParameterError("matrix is not the Vandermonde matrix of the field's nonzero elements")
    return pts


def _bw_candidates(pts, r, k, e, p, enum_cap):
    """Error-locator solutions (E monic of degree e, N of degree < k + e) with N = r E on all points."""
    m = pts.size
    cols_n = [pts**u % p for u in range(k + e)]
    cols_e = [(-r * pts**u) % p for u in range(e)]
    A = np.stack(cols_n + cols_e, axis=1) if cols_n or cols_e else np.zeros((m, 0), dtype=np.int64)
    rhs = (r * pts**e) % p
    sol = gf.solve_particular(A, rhs, p)
    if sol is None:
        return []
    if k + 2 * e <= m:
        sols = [sol]
    else:
        kernel = gf.nullspace_basis(A, p)
        if p ** len(kernel) > enum_cap:
            raise ParameterError("Berlekamp-Welch solution space too large to enumerate")
        sols = [
            (sol + np.asarray(c) @ kernel) % p if len(kernel) else sol
            for c in itertools.product(range(p), repeat=len(kernel))
        ]
    out = []
    for s in sols:
        N = [int(a) for a in s[: k + e]]
        E = [int(a) for a in s[k + e :]] + [1]
        out.append((N, E))
    return out


def bw_decode(inst: MaxLinsatInstance, syndrome, l_cap: int, enum_cap: int = 10**5) -> DecodeOutcome:
    """Find the error y with |y| <= l_cap and B^T y = syndrome for a Vandermonde instance.

    Up to floor(n/2) the answer is unique and found by one linear solve.
    For l_cap = (n+1)/2 (odd n) every solution of the underdetermined
    system is examined and two distinct valid errors give
    ``detected-ambiguity``.
    """
    p, m, n = inst.p, inst.m, inst.n
    pts = opi_points(inst)
    if not 0 <= l_cap <= (n + 1) // 2:
        raise ParameterError(f"l_cap must lie in 0..{(n + 1) // 2}")
    s = gf.residues(syndrome, p)
    BT = inst.dense().T % p
    y0 = gf.solve_particular(BT, s, p)
    if y0 is None:
        return DecodeOutcome(FAILURE, None, 1)
    # y0 = y + c where c_i = a_i F(a_i), deg F < m - n
    k = m - n
    r = y0 * np.array([pow(int(a), -1, p) for a in pts]) % p
    found: dict[bytes, np.ndarray] = {}
    for N, E in _bw_candidates(pts, r, k, l_cap, p, enum_cap):
        F, rem = poly_divmod(N, E, p)
        if rem or len(F) > k:
            continue
        y = (y0 - pts * poly_eval(F, pts, p)) % p
        if np.count_nonzero(y) <= l_cap and np.array_equal(BT @ y % p, s):
            found[y.tobytes()] = y
    if not found:
        return DecodeOutcome(FAILURE, None, 1)
    if len(found) > 1:
        return DecodeOutcome(AMBIGUOUS, None, 1)
    return DecodeOutcome(SUCCESS, next(iter(found.values())), 1)


# ---------------------------------------------------------------- belief propagation

@dataclass(frozen=True)
class BpConfig:
    q: float
    max_iter: int = 100
    damping: float = 0.0
    min_sum: bool = False
    early_exit: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.q < 0.5:
            raise ParameterError("prior flip rate must lie in (0, 1/2)")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if not 0 <= self.damping < 1:
            raise ParameterError("damping must lie in [0, 1)")


class TannerGraph:
    """Edge lists of a sparse binary parity-check matrix H (checks x bits)."""

    def __init__(self, H) -> None:
        H = sp.csr_matrix(H, dtype=np.int64)
        H.data %= 2
        H.eliminate_zeros()
        H.sort_indices()
        self.H = H
        self.checks, self.bits = H.shape
        self.indptr = H.indptr
        self.edge_check = np.repeat(np.arange(self.checks), np.diff(H.indptr))
        self.edge_bit = H.indices.astype(np.int64)
        deg = np.diff(H.indptr)
        self.nonempty = np.flatnonzero(deg > 0)
        self.starts = H.indptr[:-1][self.nonempty]

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return (self.H @ e.astype(np.int64)) % 2


def _check_messages_sp(g: TannerGraph, msg, synd):
    t = np.tanh(0.5 * msg)
    neg = t < 0
    logmag = np.log(np.maximum(np.abs(t), 1e-300))
    tot = np.bincount(g.edge_check, logmag, minlength=g.checks)
    par = np.bincount(g.edge_check, neg, minlength=g.checks).astype(np.int64) % 2
    mag = np.exp(tot[g.edge_check] - logmag)
    sign = (par[g.edge_check] ^ neg ^ synd[g.edge_check]).astype(bool)
    out = 2.0 * np.arctanh(np.minimum(mag, 1 - 1e-16))
    return np.where(sign, -out, out)


def _check_messages_ms(g: TannerGraph, msg, synd):
    a = np.abs(msg)
    neg = msg < 0
    par = np.bincount(g.edge_check, neg, minlength=g.checks).astype(np.int64) % 2
    min1 = np.full(g.checks, np.inf)
    min1[g.nonempty] = np.minimum.reduceat(a, g.starts)
    at_min = a == min1[g.edge_check]
    first = np.zeros(a.size, dtype=bool)
    idx = np.flatnonzero(at_min)
    _, pick = np.unique(g.edge_check[idx], return_index=True)
    first[idx[pick]] = True
    masked = np.where(first, np.inf, a)
    min2 = np.full(g.checks, np.inf)
    min2[g.nonempty] = np.minimum.reduceat(masked, g.starts)
    mag = np.where(first, min2[g.edge_check], min1[g.edge_check])
    mag = np.where(np.isinf(mag), 0.0, mag)
    sign = (par[g.edge_check] ^ neg ^ synd[g.edge_check]).astype(bool)
    return np.where(sign, -mag, mag)


def bp_decode(H, syndrome, cfg: BpConfig) -> DecodeOutcome:
    """Estimate the lowest-weight-looking error e with H e = syndrome over F_2.

    ``H`` is B^T (n checks by m bits) or a prepared ``TannerGraph``.
    Deterministic: messages start from the prior, no randomness.
    """
    g = H if isinstance(H, TannerGraph) else TannerGraph(H)
    synd = np.asarray(syndrome, dtype=np.int64) % 2
    if synd.shape != (g.checks,):
        raise ParameterError(f"syndrome must have length {g.checks}")
    prior = math.log((1 - cfg.q) / cfg.q)
    hard = np.zeros(g.bits, dtype=np.uint8)
    resid = int(np.count_nonzero(g.syndrome(hard) != synd))
    if resid == 0:
        return DecodeOutcome(SUCCESS, hard.astype(np.int64), 0, 0)
    msg_vc = np.full(g.edge_bit.size, prior)
    msg_cv = np.zeros_like(msg_vc)
    update = _check_messages_ms if cfg.min_sum else _check_messages_sp
    best = (resid, hard, 0)
    for it in range(1, cfg.max_iter + 1):
        new = update(g, msg_vc, synd)
        msg_cv = new if cfg.damping == 0 else (1 - cfg.damping) * new + cfg.damping * msg_cv
        total = prior + np.bincount(g.edge_bit, msg_cv, minlength=g.bits)
        hard = (total < 0).astype(np.uint8)
        resid = int(np.count_nonzero(g.syndrome(hard) != synd))
        if resid < best[0]:
            best = (resid, hard, it)
        if resid == 0 and cfg.early_exit:
            return DecodeOutcome(SUCCESS, hard.astype(np.int64), it, 0)
        msg_vc = np.clip(total[g.edge_bit] - msg_cv, -60.0, 60.0)
    if best[0] == 0:
        return DecodeOutcome(SUCCESS, best[1].astype(np.int64), best[2], 0)
    return DecodeOutcome(FAILURE, None, cfg.max_iter, best[0])


# ---------------------------------------------------------------- failure statistics

class FailureEstimate(NamedTuple):
    failures: int
    trials: int
    rate: float
    ci_low: float
    ci_high: float
    wrong_valid: int  # syndrome-consistent answers that differ from the planted error


def _decoder_for(decoder, inst: MaxLinsatInstance, l: int, cfg: BpConfig | None) -> Callable:
    if callable(decoder):
        return decoder
    if decoder == "bw":
        cap = l
        return lambda s: bw_decode(inst, s, cap)
    if decoder == "bp":
        if inst.p != 2:
            raise ParameterError("belief propagation is implemented for p = 2")
        graph = TannerGraph(inst.BT)
        conf = cfg or BpConfig(q=min(max(l / inst.m, 1e-6), 0.49))
        return lambda s: bp_decode(graph, s, conf)
    raise ParameterError(f"unknown decoder {decoder!r}")


def failure_rate(decoder, inst: MaxLinsatInstance, l: int, trials: int, seed: int, cfg: BpConfig | None = None) -> FailureEstimate:
    """Fraction of uniformly random weight-l errors the decoder does not recover exactly.

    Every reported success is re-multiplied against its syndrome; a mismatch
    raises GateError since it means the decoder lied.
    """
    if trials < 1:
        raise ParameterError("trials must be positive")
    if not 0 <= l <= inst.m:
        raise ParameterError("need 0 <= l <= m")
    run = _decoder_for(decoder, inst, l, cfg)
    BT = inst.BT
    p = inst.p
    failures = wrong = 0
    for trial in range(trials):
        rng = substream(seed, f"failure-rate:{l}", trial)
        y = np.zeros(inst.m, dtype=np.int64)
        pos = rng.choice(inst.m, l, replace=False)
        y[pos] = rng.integers(1, p, l) if p > 2 else 1
        s = gf.mat_vec_mul(BT, y, p)
        out = run(s)
        if out.ok:
            if not np.array_equal(gf.mat_vec_mul(BT, out.error, p), s):
                raise GateError("decoder reported success on a vector with the wrong syndrome")
            if not np.array_equal(out.error % p, y):
                wrong += 1
                failures += 1
        else:
            failures += 1
    ci = binomtest(failures, trials).proportion_ci(0.95, method="wilson")
    return FailureEstimate(failures, trials, failures / trials, float(ci.low), float(ci.high), wrong)


# ---------------------------------------------------------------- density evolution

class Threshold(NamedTuple):
    q: float
    lo: float
    hi: float


def _edge_fractions(node_fracs: dict[int, float]) -> tuple[np.ndarray, np.ndarray]:
    degs = np.array(list(node_fracs), dtype=np.int64)
    w = degs * np.array(list(node_fracs.values()))
    return degs, w / w.sum()


def _de_converges(q, bit_degs, bit_w, chk_degs, chk_w, samples, iters, rng, tol) -> bool:
    """Population dynamics for BP on a binary symmetric channel, all-zero word."""
    prior = math.log((1 - q) / q)
    clip = 40.0

    def channel(size):
        return np.where(rng.random(size) < q, -prior, prior)

    P = channel(samples)
    stall = 0
    best = 1.0
    for _ in range(iters):
        counts = rng.multinomial(samples, chk_w)
        parts = []
        T = np.tanh(0.5 * P)
        for d, c in zip(chk_degs, counts):
            if c == 0:
                continue
            if d == 1:
                parts.append(np.full(c, clip))
                continue
            prod = np.prod(T[rng.integers(0, samples, (c, d - 1))], axis=1)
            parts.append(2.0 * np.arctanh(np.clip(prod, -1 + 1e-16, 1 - 1e-16)))
        Q = np.concatenate(parts)
        counts = rng.multinomial(samples, bit_w)
        parts = []
        for d, c in zip(bit_degs, counts):
            if c == 0:
                continue
            incoming = Q[rng.integers(0, samples, (c, d - 1))].sum(axis=1) if d > 1 else 0.0
            parts.append(channel(c) + incoming)
        P = np.clip(np.concatenate(parts), -clip, clip)
        err = float(np.mean(P < 0) + 0.5 * np.mean(P == 0))
        if err <= tol:
            return True
        if err < best * 0.999:
            best, stall = err, 0
        else:
            stall += 1
            if stall >= 25:
                return False
    return False


def density_evolution_threshold(
    dist: DegreeDistribution,
    samples: int = 100_000,
    iters: int = 300,
    seed: int = 0,
    resolution: float = 1e-3,
    bracket: tuple[float, float] = (1e-3, 0.499),
) -> Threshold:
    """Largest flip rate at which BP's bit error rate is driven to zero, by bisection.

    Code bits are the instance's constraints and code checks its variables,
    so bit degrees follow ``dist.constraint`` and check degrees
    ``dist.variable``.
    """
    if samples < 100 or iters < 1:
        raise ParameterError("need at least 100 samples and one iteration")
    bit_degs, bit_w = _edge_fractions(dist.constraint)
    chk_degs, chk_w = _edge_fractions(dist.variable)
    tol = 1.0 / samples
    lo, hi = bracket
    step = 0

    def ok(q):
        nonlocal step
        step += 1
        return _de_converges(q, bit_degs, bit_w, chk_degs, chk_w, samples, iters, substream(seed, "density-evolution", step), tol)

    if not ok(lo):
        raise NumericError(f"BP fails even at the bottom of the bracket [{lo}, {hi}]")
    if ok(hi):
        raise NumericError(f"BP succeeds even at the top of the bracket [{lo}, {hi}]")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return Threshold(0.5 * (lo + hi), lo, hi)


# ---------------------------------------------------------------- alist export

def to_alist(H) -> str:
    """Alist text for a binary parity-check matrix H (checks x bits).

    Line 1 gives the bit count and check count, line 2 the largest bit and
    check degrees, then the degree lists and 1-based neighbour lists (bits
    first, then checks), each zero-padded to the largest degree.
    """
    H = sp.csr_matrix(H)
    checks, bits = H.shape
    Hc = H.tocsc()
    col_lists = [sorted(Hc.indices[Hc.indptr[j] : Hc.indptr[j + 1]]) for j in range(bits)]
    row_lists = [sorted(H.indices[H.indptr[i] : H.indptr[i + 1]]) for i in range(checks)]
    max_col = max((len(c) for c in col_lists), default=0)
    max_row = max((len(r) for r in row_lists), default=0)
    lines = [f"{bits} {checks}", f"{max_col} {max_row}"]
    lines.append(" ".join(str(len(c)) for c in col_lists))
    lines.append(" ".join(str(len(r)) for r in row_lists))
    for c in col_lists:
        lines.append(" ".join(str(i + 1) for i in c) + " 0" * (max_col - len(c)))
    for r in row_lists:
        lines.append(" ".join(str(j + 1) for j in r) + " 0" * (max_row - len(r)))
    return "\n".join(line.strip() for line in lines) + "\n"
