"""Closed-form performance prediction from the tridiagonal quadratic form.

For a degree-l polynomial and dual distance above 2l+1, the expected number
of satisfied constraints is an affine function of w^T A w, where A is the
(l+1)x(l+1) symmetric tridiagonal matrix with diagonal (0, d, ..., l d) and
off-diagonal a_k = sqrt(k (m - k + 1)).  Its top eigenpair gives the best
weights; the asymptotic and beyond-distance formulas live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from . import kernels
from .errors import NumericError, ParameterError


@dataclass(frozen=True)
class Tridiagonal:
    m: int
    l: int
    d: float
    diag: np.ndarray
    off: np.ndarray

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def quadratic(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(w @ (self.diag * w) + 2.0 * (self.off @ (w[:-1] * w[1:])))


def slope(p: int, r: int) -> float:
    """Diagonal slope d = (p - 2r) / sqrt(r (p - r))."""
    if not 1 <= r <= p - 1:
        raise ParameterError(f"need 1 <= r <= p-1 (got r={r}, p={p})")
    return (p - 2 * r) / math.sqrt(r * (p - r))


def build_tridiagonal(m: int, l: int, d: float) -> Tridiagonal:
    if not 0 <= l <= m:
        raise ParameterError(f"need 0 <= l <= m (got l={l}, m={m})")
    k = np.arange(1, l + 1, dtype=float)
    return Tridiagonal(m, l, float(d), d * np.arange(l + 1, dtype=float), np.sqrt(k * (m - k + 1)))


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray
    residual: float


def _gershgorin_interval(diag, off):
    rad = np.zeros_like(diag)
    rad[:-1] += np.abs(off)
    rad[1:] += np.abs(off)
    return float(np.min(diag - rad)), float(np.max(diag + rad))


def principal_eig(tri: Tridiagonal, tol: float = 1e-12, max_iter: int = 50) -> EigenPair:
    """Largest eigenvalue by Sturm bisection, eigenvector by inverse iteration.

    The vector has unit 2-norm and its first nonzero entry is positive.
    Raises NumericError when the residual ||A w - lam w|| stays above
    ``tol * ||A||``.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    diag, off = np.ascontiguousarray(tri.diag, dtype=float), np.ascontiguousarray(tri.off, dtype=float)
    size = diag.size
    if size == 1:
        return EigenPair(float(diag[0]), np.ones(1), 0.0)
    offsq = off * off
    lo, hi = _gershgorin_interval(diag, off)
    scale = max(abs(lo), abs(hi), 1e-300)
    hi += 1e-12 * scale
    lo -= 1e-12 * scale
    eps = np.finfo(float).eps
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 2 * eps * max(abs(lo), abs(hi)):
            break
        if kernels.sturm_count(diag, offsq, mid) == size:
            hi = mid
        else:
            lo = mid
    lam = 0.5 * (lo + hi)

    # shift just above the top eigenvalue so the system is definite
    shift = lam + 64 * eps * scale
    ab = np.zeros((3, size))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    w = np.ones(size) / math.sqrt(size)
    residual = math.inf
    for _ in range(max_iter):
        z = solve_banded((1, 1), ab, w)
        w = z / np.linalg.norm(z)
        Aw = diag * w
        Aw[:-1] += off * w[1:]
        Aw[1:] += off * w[:-1]
        residual = float(np.linalg.norm(Aw - lam * w))
        if residual <= tol * scale:
            break
    else:
        raise NumericError(f"inverse iteration stalled with residual {residual:.3e}")
    nz = np.flatnonzero(np.abs(w) > 0)
    if w[nz[0]] < 0:
        w = -w
    return EigenPair(lam, w, residual)


def expected_satisfied(m: int, l: int, p: int, r: int, w) -> float:
    """Expected satisfied count for unit-norm weights w, valid when 2l+1 < d_perp."""
    w = np.asarray(w, dtype=float)
    if w.shape != (l + 1,):
        raise ParameterError(f"weights must have length l+1 = {l + 1}")
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ParameterError("weights must have unit 2-norm")
    tri = build_tridiagonal(m, l, slope(p, r))
    return m * r / p + math.sqrt(r * (p - r)) / p * tri.quadratic(w)


def optimal_fraction(m: int, l: int, p: int, r: int, tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Best expected satisfied fraction and its weights: rho + sqrt(rho(1-rho)) lam/m."""
    rho = r / p
    pair = principal_eig(build_tridiagonal(m, l, slope(p, r)), tol)
    return rho + math.sqrt(rho * (1 - rho)) * pair.value / m, pair.vector


def semicircle(mu: float, rho: float) -> float:
    """Limit of the optimal satisfied fraction as m grows with l/m = mu, r/p = rho."""
    if not 0 <= mu <= 0.5:
        raise ParameterError("mu must lie in [0, 1/2]")
    if not 0 < rho < 1:
        raise ParameterError("rho must lie in (0, 1)")
    if rho > 1 - mu:
        return 1.0
    return (math.sqrt(mu * (1 - rho)) + math.sqrt(rho * (1 - mu))) ** 2


def asymptotic_eig(mu: float, d: float) -> float:
    """Limit of lam_max / m."""
    if not 0 < mu <= 0.5:
        if mu == 0:
            return 0.0
        raise ParameterError("mu must lie in (0, 1/2]")
    if d < -(1 - 2 * mu) / math.sqrt(mu * (1 - mu)):
        raise ParameterError("slope below the range where the limit formula holds")
    return mu * d + 2 * math.sqrt(mu * (1 - mu))


class BeyondBounds(NamedTuple):
    avg_f: float
    worst_f: float
    avg_s: float
    worst_s: float
    worst_vacuous: bool


def beyond_distance_bounds(mu: float, zeta: float) -> BeyondBounds:
    """Lower bounds on <f>/m (and <s>/m = 1/2 + <f>/2m) when codewords sit inside the decoding radius.

    ``worst_f`` is clamped at 0 when the formula goes nonpositive, and the
    flag records that the bound carries no information.
    """
    if not 0 <= mu <= 0.25:
        raise ParameterError("mu must lie in [0, 1/4]")
    if zeta < 0:
        raise ParameterError("zeta must be nonnegative")
    core = 2 * math.sqrt(mu * (1 - mu))
    avg = core / (1 + 4 * zeta)
    worst = (core - 4 * zeta) / (1 + 4 * zeta)
    vacuous = worst <= 0
    if vacuous:
        worst = 0.0
    return BeyondBounds(avg, worst, 0.5 + avg / 2, 0.5 + worst / 2, vacuous)


def gershgorin_bound(m: int, l: int, d: float) -> float:
    """Upper bound 2 sqrt(m) + l d + 2 sqrt(l (m - l)) on lam_max.

    Needs l <= m/2 and, for negative slopes, d >= -(m - 2l)/sqrt(l (m - l))
    so that the row maximizing the disk edge is the last one.
    """
    if not 0 <= l <= m / 2:
        raise ParameterError("need 0 <= l <= m/2")
    if l > 0 and d < -(m - 2 * l) / math.sqrt(l * (m - l)):
        raise ParameterError("slope too negative for the closed-form bound")
    return 2 * math.sqrt(m) + l * d + 2 * math.sqrt(l * (m - l))


def witness_vector(l: int) -> np.ndarray:
    """Unit vector spread evenly over the last ceil(sqrt(l)) coordinates."""
    if l == 0:
        return np.ones(1)
    t = math.ceil(math.sqrt(l))
    w = np.zeros(l + 1)
    w[l + 1 - t :] = 1 / math.sqrt(t)
    return w
