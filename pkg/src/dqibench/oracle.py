"""Brute-force classical simulation of the DQI state on tiny instances.

The amplitude of x is a weighted sum of elementary symmetric polynomials in
the normalized constraint values g_i(b_i . x).  Everything is enumerated
over all p^n assignments, so this is only for checking other modules.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, NumericError, ParameterError
from .instances import MaxLinsatInstance
from .report import atomic_write_bytes, atomic_write_text
from .rng import substream

DEFAULT_BUDGET = 1 << 22
CHUNK = 1 << 15


class GTables(NamedTuple):
    values: np.ndarray  # (m, p): g_i(a)
    mean: np.ndarray  # per-constraint mean of f_i over F_p
    scale: np.ndarray  # per-constraint norm of f_i - mean
    uniform_r: bool  # every satisfying set has the same size


def g_transform(inst: MaxLinsatInstance) -> GTables:
    """Centre and normalize each +/-1 constraint table to mean 0, unit 2-norm."""
    f = 2.0 * inst.allowed.astype(float) - 1.0
    mean = f.mean(axis=1)
    centred = f - mean[:, None]
    scale = np.sqrt((centred**2).sum(axis=1))
    if np.any(scale == 0):
        bad = int(np.flatnonzero(scale == 0)[0])
        raise ParameterError(f"constraint {bad} is constant, so its table cannot be normalized")
    sizes = inst.allowed.sum(axis=1)
    return GTables(centred / scale[:, None], mean, scale, bool(np.all(sizes == sizes[0])))


def _assignments(start: int, stop: int, n: int, p: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    X = np.empty((idx.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        X[:, j] = idx % p
        idx //= p
    return X


def index_to_assignment(index: int, n: int, p: int) -> np.ndarray:
    """Lexicographic position -> assignment, x_0 most significant."""
    return _assignments(index, index + 1, n, p)[0]


def elementary_symmetric(values: np.ndarray, l: int) -> np.ndarray:
    """e_0..e_l of each row of ``values`` by the running product recurrence."""
    rows, m = values.shape
    E = np.zeros((rows, l + 1))
    E[:, 0] = 1.0
    for i in range(m):
        col = values[:, i]
        for k in range(min(i + 1, l), 0, -1):
            E[:, k] += col * E[:, k - 1]
    return E


def shell_scales(m: int, n: int, p: int, l: int) -> np.ndarray:
    """1 / sqrt(p^(n-k) C(m, k)) for k = 0..l."""
    return np.array([1.0 / math.sqrt(float(p) ** (n - k) * math.comb(m, k)) for k in range(l + 1)])


def _check_budget(inst, budget: int) -> int:
    total = inst.p**inst.n
    if total > budget:
        raise CapacityError(f"{total} assignments exceed the enumeration budget {budget}")
    return total


def _chunks(total: int):
    for start in range(0, total, CHUNK):
        yield start, min(total, start + CHUNK)


@dataclass
class DqiStateTable:
    inst: MaxLinsatInstance
    l: int
    w: np.ndarray
    amplitudes: np.ndarray  # lexicographic order over F_p^n
    satisfied: np.ndarray  # s(x) for each assignment
    norm2: float
    uniform_r: bool

    def export(self, path) -> None:
        """Write amplitudes as little-endian f64 to ``path`` and a JSON header beside it."""
        atomic_write_bytes(path, self.amplitudes.astype("<f8").tobytes())
        header = {
            "p": self.inst.p,
            "n": self.inst.n,
            "m": self.inst.m,
            "l": self.l,
            "w": [float(a) for a in self.w],
            "order": "lexicographic, first variable most significant",
            "dtype": "<f8",
            "count": int(self.amplitudes.size),
            "norm2": self.norm2,
        }
        atomic_write_text(str(path) + ".json", json.dumps(header, indent=2) + "\n")


def amplitudes(inst: MaxLinsatInstance, l: int, w, budget: int = DEFAULT_BUDGET) -> DqiStateTable:
    """Tabulate sum_k w_k e_k(g(x)) / sqrt(p^(n-k) C(m,k)) over every x."""
    if not 0 <= l <= inst.m:
        raise ParameterError("need 0 <= l <= m")
    w = np.asarray(w, dtype=float)
    if w.shape != (l + 1,):
        raise ParameterError(f"weights must have length {l + 1}")
    total = _check_budget(inst, budget)
    g = g_transform(inst)
    coef = w * shell_scales(inst.m, inst.n, inst.p, l)
    Bd = inst.dense()
    amp = np.empty(total)
    sat = np.empty(total, dtype=np.int32)
    rows = np.arange(inst.m)
    for start, stop in _chunks(total):
        Y = (_assignments(start, stop, inst.n, inst.p) @ Bd.T) % inst.p
        G = g.values[rows, Y]
        amp[start:stop] = elementary_symmetric(G, l) @ coef
        sat[start:stop] = inst.allowed[rows, Y].sum(axis=1)
    norm2 = math.fsum(float(np.dot(amp[a:b], amp[a:b])) for a, b in _chunks(total))
    return DqiStateTable(inst, l, w, amp, sat, norm2, g.uniform_r)


class Expectation(NamedTuple):
    s: float
    f: float
    norm2: float


def exact_expectation(state: DqiStateTable) -> Expectation:
    """Mean satisfied count and mean +/-1 objective under |amplitude|^2."""
    if state.norm2 == 0:
        raise ParameterError("the state is zero")
    total = state.amplitudes.size
    weighted = math.fsum(
        float(np.dot(state.satisfied[a:b], state.amplitudes[a:b] ** 2)) for a, b in _chunks(total)
    )
    s = weighted / state.norm2
    return Expectation(s, 2 * s - state.inst.m, state.norm2)


def shell_gram(inst: MaxLinsatInstance, l: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Gram matrix of the normalized shell states e_k(f(x)) / sqrt(p^n C(m,k)), binary case."""
    if inst.p != 2:
        raise ParameterError("shell Gram matrices are defined here for p = 2")
    total = _check_budget(inst, budget)
    f = 2.0 * inst.allowed.astype(float) - 1.0
    scale = np.array([1.0 / math.sqrt(2.0**inst.n * math.comb(inst.m, k)) for k in range(l + 1)])
    Bd = inst.dense()
    rows = np.arange(inst.m)
    parts = []
    for start, stop in _chunks(total):
        Y = (_assignments(start, stop, inst.n, 2) @ Bd.T) % 2
        V = elementary_symmetric(f[rows, Y], l) * scale
        parts.append(V.T @ V)
    return np.sum(parts, axis=0)


class AliasTable:
    """Walker/Vose alias table for O(1) draws from a finite distribution."""

    def __init__(self, weights) -> None:
        wts = np.asarray(weights, dtype=float)
        if wts.ndim != 1 or wts.size == 0 or np.any(wts < 0) or wts.sum() <= 0:
            raise ParameterError("alias table needs nonnegative weights with a positive sum")
        size = wts.size
        scaled = wts * (size / wts.sum())
        prob = np.ones(size)
        alias = np.arange(size)
        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            (small if scaled[g] < 1.0 else large).append(g)
        self.prob = prob
        self.alias = alias

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        i = rng.integers(0, self.prob.size, count)
        u = rng.random(count)
        return np.where(u < self.prob[i], i, self.alias[i])


def sample(state: DqiStateTable, shots: int, seed: int) -> np.ndarray:
    """Measurement outcomes as lexicographic assignment indices."""
    if shots < 1:
        raise ParameterError("shots must be positive")
    table = AliasTable(state.amplitudes**2)
    return table.draw(substream(seed, "oracle-sample"), shots)


# ---------------------------------------------------------------- polynomial <-> weights

def krawtchouk(k: int, t: int, m: int) -> int:
    """e_k evaluated at m signs of which t are -1."""
    return sum((-1) ** j * math.comb(t, j) * math.comb(m - t, k - j) for j in range(0, min(k, t) + 1))


def _poly_eval(coeffs: Sequence[Fraction], x: int) -> Fraction:
    acc = Fraction(0)
    for a in reversed(coeffs):
        acc = acc * x + a
    return acc


def _value_scales(p: int, r: int) -> tuple[float, float]:
    """Mean and norm of a +/-1 table with r entries equal to +1 out of p."""
    mean = (2 * r - p) / p
    return mean, 2 * math.sqrt(r * (p - r) / p)


def poly_to_weights(coeffs, m: int, p: int, r: int, n: int) -> tuple[list[Fraction], np.ndarray]:
    """Expand P(f_1 + ... + f_m) in elementary symmetric polynomials.

    Returns (u, w): P(sum f) = sum_k u_k e_k(f) with u exact, and the shell
    weights w that reproduce the same amplitude table.
    """
    import sympy

    alpha = [Fraction(a) for a in coeffs]
    l = len(alpha) - 1
    if not 0 <= l <= m:
        raise ParameterError("polynomial degree must lie in 0..m")
    if not 1 <= r <= p - 1:
        raise ParameterError("need 1 <= r <= p-1")
    K = sympy.Matrix(l + 1, l + 1, lambda t, k: krawtchouk(k, t, m))
    rhs = sympy.Matrix([sympy.Rational(_poly_eval(alpha, m - 2 * t)) for t in range(l + 1)])
    sol = K.LUsolve(rhs)
    u = [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in sol]
    for t in range(l + 1, m + 1):
        if sum(u[k] * krawtchouk(k, t, m) for k in range(l + 1)) != _poly_eval(alpha, m - 2 * t):
            raise NumericError(f"expansion fails at t = {t}; the sample system is rank deficient")
    mean, scale = _value_scales(p, r)
    w = np.empty(l + 1)
    for j in range(l + 1):
        ug = math.fsum(float(u[k]) * math.comb(m - j, k - j) * mean ** (k - j) for k in range(j, l + 1))
        w[j] = ug * scale**j * math.sqrt(float(p) ** (n - j) * math.comb(m, j))
    return u, w


def weights_to_poly(w, m: int, p: int, r: int, n: int) -> np.ndarray:
    """Coefficients of the polynomial in f = sum f_i whose amplitude table matches ``w``."""
    w = np.asarray(w, dtype=float)
    l = w.size - 1
    mean, scale = _value_scales(p, r)
    ug = [w[j] / math.sqrt(float(p) ** (n - j) * math.comb(m, j)) for j in range(l + 1)]
    uf = [
        math.fsum(ug[j] * scale ** (-j) * math.comb(m - k, j - k) * (-mean) ** (j - k) for j in range(k, l + 1))
        for k in range(l + 1)
    ]
    pts = np.array([m - 2 * t for t in range(l + 1)], dtype=float)
    vals = np.array([math.fsum(uf[k] * krawtchouk(k, t, m) for k in range(l + 1)) for t in range(l + 1)])
    V = np.vander(pts, l + 1, increasing=True)
    return np.linalg.solve(V, vals)


def fidelity_bound(eps: float, eta: float) -> float:
    """Probability floor for reaching the objective threshold with an imperfect decoder.

    ``eps`` is the decoder's failure probability and ``eta`` the probability
    that the ideal state misses the threshold.
    """
    if not (0 <= eps <= 1 and 0 <= eta <= 1):
        raise ParameterError("eps and eta must lie in [0, 1]")
    if eps + eta >= 1:
        return 0.0
    return 0.8 * (1 - eps - eta) ** 2
