"""Classical heuristics for max-LINSAT used as points of comparison.

Local search (annealing, greedy descent, irregular annealing) runs on the
compiled kernels from ``kernels``; truncation and AdvRand are built from
elimination and unit propagation.  Every result's satisfied fraction is
recomputed from the returned assignment.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import gf, kernels
from .errors import GateError, ParameterError
from .instances import MaxLinsatInstance, constraint_values, satisfied_count
from .rng import substream


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear inverse-temperature ramp, one value per sweep.

    Both ends infinite selects the zero-temperature rule, which accepts
    strictly improving moves only.
    """

    sweeps: int = 5000
    beta_start: float = 0.0
    beta_end: float = 3.0

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ParameterError("need at least one sweep")
        if not 0 <= self.beta_start <= self.beta_end:
            raise ParameterError("need 0 <= beta_start <= beta_end")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta_start)

    def betas(self) -> np.ndarray:
        if self.zero_temperature:
            return np.full(self.sweeps, math.inf)
        if self.sweeps == 1:
            return np.array([self.beta_start])
        return np.linspace(self.beta_start, self.beta_end, self.sweeps)


@dataclass
class RunResult:
    algorithm: str
    x: np.ndarray
    satisfied: int
    m: int
    seed: int
    trajectory: list[int] = field(default_factory=list)
    wallclock_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def phi(self) -> float:
        return self.satisfied / self.m

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "x": [int(a) for a in self.x],
            "satisfied": self.satisfied,
            "m": self.m,
            "phi": self.phi,
            "seed": self.seed,
            "trajectory": list(self.trajectory),
            "wallclock_ms": self.wallclock_ms,
            "extra": self.extra,
        }


def _result(name, inst, x, seed, start, trajectory=(), **extra) -> RunResult:
    x = np.asarray(x, dtype=np.int64)
    return RunResult(name, x, satisfied_count(inst, x), inst.m, seed, list(trajectory), (time.perf_counter() - start) * 1e3, extra)


# ---------------------------------------------------------------- local search

class _LocalState:
    """Assignment plus incremental per-constraint bookkeeping for the sweep kernels."""

    def __init__(self, inst: MaxLinsatInstance, x0: np.ndarray) -> None:
        self.inst = inst
        csc = inst.B.tocsc()
        csc.sort_indices()
        self.var_ptr = csc.indptr.astype(np.int64)
        self.var_cons = csc.indices.astype(np.int64)
        self.var_vals = csc.data.astype(np.int64)
        if inst.p == 2:
            self.x = np.ascontiguousarray(x0, dtype=np.uint8)
            self.sat = self._recount_sat()
            self.current = int(self.sat.sum())
        else:
            self.x = np.ascontiguousarray(x0, dtype=np.int64)
            self.y = np.ascontiguousarray(constraint_values(inst, self.x), dtype=np.int64)
            self.allowed = np.ascontiguousarray(inst.allowed.ravel())
            self.current = int(inst.allowed[np.arange(inst.m), self.y].sum())

    def _recount_sat(self) -> np.ndarray:
        y = constraint_values(self.inst, self.x)
        return np.ascontiguousarray(y == self.inst.v, dtype=np.uint8)

    def sweep(self, beta: float, weights: np.ndarray, rng: np.random.Generator, strict: bool) -> int:
        n = self.inst.n
        u = rng.random(n)
        if self.inst.p == 2:
            acc, ds = kernels.anneal_f2(self.x, self.sat, self.var_ptr, self.var_cons, weights, beta, u, strict)
        else:
            shift = rng.integers(1, self.inst.p, n)
            acc, ds = kernels.anneal_fp(
                self.x, self.y, self.var_ptr, self.var_cons, self.var_vals, self.allowed,
                self.inst.p, weights, beta, u, shift, strict,
            )
        self.current += int(ds)
        return int(acc)

    def verify(self) -> None:
        full = satisfied_count(self.inst, self.x)
        if full != self.current:
            raise GateError(f"incremental count {self.current} disagrees with recount {full}")


def _initial(inst: MaxLinsatInstance, seed: int) -> np.ndarray:
    return substream(seed, "initial-assignment").integers(0, inst.p, inst.n)


def _anneal(inst, betas, seed, name, weight_fn: Callable[[float], np.ndarray] | None, strict, debug):
    start = time.perf_counter()
    state = _LocalState(inst, _initial(inst, seed))
    rng = substream(seed, "metropolis")
    ones = np.ones(inst.m)
    best, best_x = state.current, state.x.copy()
    trajectory = []
    sweeps_done = 0
    for beta in betas:
        weights = ones if weight_fn is None else weight_fn(float(beta))
        state.sweep(float(beta), weights, rng, strict)
        sweeps_done += 1
        if debug:
            state.verify()
        if state.current > best:
            best, best_x = state.current, state.x.copy()
        trajectory.append(best)
    state.verify()
    return _result(name, inst, best_x, seed, start, trajectory, sweeps=sweeps_done)


def simulated_annealing(inst: MaxLinsatInstance, sched: AnnealSchedule = AnnealSchedule(), seed: int = 0, debug: bool = False) -> RunResult:
    """Metropolis single-variable updates swept in variable order.

    A move that changes the +/-1 objective by delta >= 0 is always taken,
    otherwise with probability exp(beta * delta).  Returns the best
    end-of-sweep assignment.
    """
    return _anneal(inst, sched.betas(), seed, "sa", None, sched.zero_temperature, debug)


def greedy(inst: MaxLinsatInstance, seed: int = 0, max_sweeps: int = 100_000, debug: bool = False) -> RunResult:
    """Take strictly improving single-variable changes until none is left.

    Over F_2 a sweep without an accepted flip certifies a local optimum.
    Over F_p each sweep tries one random shift per variable, so the stop is
    confirmed by checking every shift.
    """
    start = time.perf_counter()
    state = _LocalState(inst, _initial(inst, seed))
    rng = substream(seed, "metropolis")
    ones = np.ones(inst.m)
    trajectory = []
    certified = False
    for _ in range(max_sweeps):
        accepted = state.sweep(math.inf, ones, rng, True)
        if debug:
            state.verify()
        trajectory.append(state.current)
        if accepted == 0 and (inst.p == 2 or is_local_optimum(inst, state.x)):
            certified = True
            break
    state.verify()
    return _result("greedy", inst, state.x, seed, start, trajectory, sweeps=len(trajectory), local_optimum=certified)


def is_local_optimum(inst: MaxLinsatInstance, x) -> bool:
    """True when no single-variable change increases the satisfied count."""
    x = np.asarray(x, dtype=np.int64)
    p = inst.p
    y = constraint_values(inst, x)
    csc = inst.B.tocsc()
    allowed = inst.allowed
    for j in range(inst.n):
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        cons, vals = csc.indices[lo:hi], csc.data[lo:hi]
        now = allowed[cons, y[cons]].sum()
        for a in range(1, p):
            if allowed[cons, (y[cons] + a * vals) % p].sum() > now:
                return False
    return True


def irregular_weights(degrees: np.ndarray) -> Callable[[float], np.ndarray]:
    deg = np.asarray(degrees, dtype=float)

    def weights(beta: float) -> np.ndarray:
        return np.maximum(0.0, 1.0 - np.exp(-beta / deg))

    return weights


def irregular_annealing(inst: MaxLinsatInstance, sched: AnnealSchedule = AnnealSchedule(beta_end=5.0), seed: int = 0, debug: bool = False) -> RunResult:
    """Annealing on a degree-weighted objective.

    Constraint i counts with weight 1 - exp(-beta / deg_i), so sparse
    constraints dominate while beta is small.  Progress is still judged by
    the plain satisfied count.
    """
    if inst.p != 2:
        raise ParameterError("irregular annealing is implemented for p = 2")
    deg = inst.constraint_degrees()
    if np.any(deg == 0):
        raise ParameterError("every constraint needs at least one variable")
    return _anneal(inst, sched.betas(), seed, "irregular-annealing", irregular_weights(deg), sched.zero_temperature, debug)


def local_search_ceiling(N: float, D: float) -> float:
    """Fraction above which N single-flip moves are unlikely to find a better local optimum."""
    if N < 1 or D < 1:
        raise ParameterError("need N >= 1 and D >= 1")
    return 0.5 + math.sqrt((math.log(N) + math.log(2)) / (2 * D))


# ---------------------------------------------------------------- truncation

def _truncation_trial(inst, BT_dense, rng):
    """Solve a maximal independent subset of constraints exactly; return (x, rank)."""
    m, n, p = inst.m, inst.n, inst.p
    if p == 2:
        perm = rng.permutation(m)
        targets = inst.v.astype(np.int64)
    else:
        sizes = inst.allowed.sum(axis=1)
        tie = rng.permutation(m)
        perm = np.lexsort((tie, sizes))
        targets = np.array([rng.choice(F) for F in inst.f_sets], dtype=np.int64)
    if p == 2:
        packed = gf.pack_rows(BT_dense[:, perm])
        piv = kernels.gf2_rref(packed, m)
    else:
        piv = gf._rref_generic(BT_dense[:, perm], p, m)[1]
    chosen = perm[np.asarray(piv, dtype=np.int64)]
    rank = chosen.size
    Bs = inst.B[chosen].toarray() % p
    aug = np.hstack([Bs, targets[chosen, None]])
    if p == 2:
        R, vpiv = gf._rref_packed(aug, n)
    else:
        R, vpiv = gf._rref_generic(aug, p, n)
    x = rng.integers(0, p, n)
    vpiv = list(vpiv)
    free = np.setdiff1d(np.arange(n), vpiv)
    for i, c in enumerate(vpiv):
        x[c] = (R[i, n] - R[i, free] @ x[free]) % p
    return x, rank


def truncation(inst: MaxLinsatInstance, trials: int = 1, seed: int = 0) -> RunResult:
    """Exactly satisfy rank(B) constraints picked in random order; the rest fall where they may.

    Constraints are scanned in a random order (over F_p, smallest satisfying
    sets first) and kept when independent of those already kept; the kept
    system is solved with free variables drawn at random.
    """
    if trials < 1:
        raise ParameterError("trials must be positive")
    start = time.perf_counter()
    BT_dense = inst.BT.toarray() % inst.p
    best_x, best_s = None, -1
    fractions, ranks = [], []
    for t in range(trials):
        rng = substream(seed, "truncation", t)
        x, rank = _truncation_trial(inst, BT_dense, rng)
        s = satisfied_count(inst, x)
        if s < rank:
            raise GateError(f"truncation satisfied {s} constraints, fewer than the rank {rank}")
        fractions.append(s / inst.m)
        ranks.append(rank)
        if s > best_s:
            best_x, best_s = x, s
    return _result("truncation", inst, best_x, seed, start, trial_fractions=fractions, ranks=ranks)


# ---------------------------------------------------------------- AdvRand

def _fixed_counts(n: int, R_grid) -> list[int]:
    if R_grid is None or R_grid == "all":
        return list(range(n + 1))
    counts = []
    for R in R_grid:
        if not 0 <= float(R) <= 1:
            raise ParameterError(f"fixed fraction {R} outside [0, 1]")
        counts.append(int(round(float(R) * n)))
    return counts


def advrand(inst: MaxLinsatInstance, F: float = 0.0, R_grid="all", seed: int = 0) -> RunResult:
    """Fix a random fraction R of the variables, satisfy degree-one leftovers, fill randomly.

    ``R_grid`` is a list of fractions, or "all" for every count 0..n.  The
    best assignment over the grid is returned.
    """
    if inst.p != 2:
        raise ParameterError("AdvRand is implemented for p = 2")
    if not 0 <= F <= 1:
        raise ParameterError("flip probability must lie in [0, 1]")
    start = time.perf_counter()
    grid = _fixed_counts(inst.n, R_grid)
    B = inst.B
    csc = B.tocsc()
    con_ptr, con_vars = B.indptr.astype(np.int64), B.indices.astype(np.int64)
    var_ptr, var_cons = csc.indptr.astype(np.int64), csc.indices.astype(np.int64)
    v = np.ascontiguousarray(inst.v, dtype=np.uint8)
    best_x, best_s, best_r = None, -1, None
    trajectory = []
    for Rn in grid:
        rng = substream(seed, "advrand", Rn)
        order = rng.permutation(inst.n).astype(np.int64)
        fixed = rng.integers(0, 2, inst.n).astype(np.uint8)
        fill = rng.integers(0, 2, inst.n).astype(np.uint8)
        x = kernels.advrand_pass(order, Rn, fixed, fill, con_ptr, con_vars, var_ptr, var_cons, v)
        if F > 0:
            x ^= (rng.random(inst.n) < F).astype(np.uint8)
        s = int(((B @ x.astype(np.int64)) % 2 == inst.v).sum())
        trajectory.append(s)
        if s > best_s:
            best_x, best_s, best_r = x, s, Rn
    return _result("advrand", inst, best_x, seed, start, trajectory, best_fixed=best_r)


def fit_power_law(D, excess) -> tuple[float, float]:
    """Least-squares fit of excess = c / D**nu on log scale; returns (c, nu)."""
    D = np.asarray(D, dtype=float)
    excess = np.asarray(excess, dtype=float)
    if D.size < 2 or np.any(D <= 0) or np.any(excess <= 0):
        raise ParameterError("need two or more positive (D, excess) pairs")
    slope_, icept = np.polyfit(np.log(D), np.log(excess), 1)
    return float(math.exp(icept)), float(-slope_)
