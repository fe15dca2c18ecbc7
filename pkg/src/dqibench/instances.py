"""max-LINSAT instances: construction, evaluation and JSON round-tripping.

An instance asks for x in F_p^n maximizing the number of rows i with
b_i . x in F_i.  Over F_2 each F_i is the single value v_i.  The matrix B
(m x n) is kept as a CSR matrix of residues.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .gf import field, mat_vec_mul
from .rng import substream


@dataclass(eq=False)
class MaxLinsatInstance:
    p: int
    B: sp.csr_matrix
    v: np.ndarray | None = None
    f_sets: tuple[tuple[int, ...], ...] | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self) -> None:
        field(self.p)
        B = sp.csr_matrix(self.B, dtype=np.int64)
        B.data = np.mod(B.data, self.p)
        B.eliminate_zeros()
        B.sort_indices()
        self.B = B
        m, n = B.shape
        if m < n:
            raise ParameterError(f"need at least as many constraints as variables (m={m}, n={n})")
        if self.p == 2:
            if self.v is None:
                raise ParameterError("binary instances need a right-hand side v")
            self.v = np.asarray(self.v, dtype=np.uint8)
            if self.v.shape != (m,) or np.any(self.v > 1):
                raise ParameterError("v must be a 0/1 vector of length m")
            self.f_sets = None
        else:
            if self.f_sets is None or len(self.f_sets) != m:
                raise ParameterError("instances over F_p, p > 2, need one satisfying set per row")
            sets = []
            for i, F in enumerate(self.f_sets):
                F = tuple(int(a) for a in F)
                if list(F) != sorted(set(F)) or not F or F[0] < 0 or F[-1] >= self.p:
                    raise ParameterError(f"satisfying set {i} must be sorted, unique residues")
                if not 1 <= len(F) <= self.p - 1:
                    raise ParameterError(f"satisfying set {i} has size {len(F)}, need 1..p-1")
                sets.append(F)
            self.f_sets = tuple(sets)
            self.v = None
        x = self.meta.get("planted_x")
        if x is not None and satisfied_count(self, x) != m:
            raise ParameterError("planted assignment does not satisfy every constraint")

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def n(self) -> int:
        return self.B.shape[1]

    @cached_property
    def allowed(self) -> np.ndarray:
        """(m, p) uint8 table; entry [i, a] is 1 when a is in F_i."""
        table = np.zeros((self.m, self.p), dtype=np.uint8)
        if self.p == 2:
            table[np.arange(self.m), self.v] = 1
        else:
            for i, F in enumerate(self.f_sets):
                table[i, list(F)] = 1
        return table

    @cached_property
    def BT(self) -> sp.csr_matrix:
        return self.B.T.tocsr()

    def dense(self) -> np.ndarray:
        return self.B.toarray()

    def constraint_degrees(self) -> np.ndarray:
        return np.diff(self.B.indptr)

    def variable_degrees(self) -> np.ndarray:
        return np.diff(self.BT.indptr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MaxLinsatInstance):
            return NotImplemented
        return (
            self.p == other.p
            and self.B.shape == other.B.shape
            and (self.B != other.B).nnz == 0
            and (self.v is None) == (other.v is None)
            and (self.v is None or np.array_equal(self.v, other.v))
            and self.f_sets == other.f_sets
            and self.meta == other.meta
        )


def constraint_values(inst: MaxLinsatInstance, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (inst.n,):
        raise ParameterError(f"assignment has shape {x.shape}, expected ({inst.n},)")
    return mat_vec_mul(inst.B, x, inst.p)


def satisfied_count(inst: MaxLinsatInstance, x) -> int:
    y = constraint_values(inst, x)
    return int(inst.allowed[np.arange(inst.m), y].sum())


def objective(inst: MaxLinsatInstance, x) -> int:
    """Sum of the +/-1 constraint values: 2 s(x) - m."""
    return 2 * satisfied_count(inst, x) - inst.m


# ---------------------------------------------------------------- generators

def primitive_element(p: int) -> int:
    """Smallest generator of the multiplicative group of F_p."""
    field(p)
    if p == 2:
        return 1
    order = p - 1
    factors = {q for q in range(2, order + 1) if order % q == 0 and all(q % r for r in range(2, int(math.isqrt(q)) + 1))}
    for g in range(2, p):
        if all(pow(g, order // q, p) != 1 for q in factors):
            return g
    raise AssertionError("unreachable: every prime field has a generator")


def _plant_binary(B: sp.csr_matrix, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    x = rng.integers(0, 2, B.shape[1])
    return mat_vec_mul(B, x, 2).astype(np.uint8), x


def gen_gallager(k: int, D: int, b: int, seed: int, plant: bool = False) -> MaxLinsatInstance:
    """Regular instance: m = bD constraints of k variables, each variable in D constraints.

    B^T stacks k layers.  Each layer is the b x bD block [I ... I] with its
    columns permuted uniformly at random, so constraint j meets exactly one
    variable per layer.
    """
    if min(k, D, b) < 1:
        raise ParameterError("k, D and b must all be positive")
    if D < k:
        raise ParameterError(f"need D >= k so that m >= n (got k={k}, D={D})")
    rng = substream(seed, "gallager")
    m, n = b * D, b * k
    cols = np.empty((m, k), dtype=np.int64)
    for layer in range(k):
        perm = rng.permutation(m)
        cols[:, layer] = layer * b + perm % b
    B = sp.csr_matrix((np.ones(m * k, dtype=np.int64), cols.ravel(), np.arange(0, m * k + 1, k)), shape=(m, n))
    meta = {"generator": "gallager", "seed": seed, "params": {"k": k, "D": D, "b": b}}
    if plant:
        v, x = _plant_binary(B, rng)
        meta["planted_x"] = x.tolist()
    else:
        v = rng.integers(0, 2, m)
    return MaxLinsatInstance(2, B, v=v, meta=meta)


def gen_opi(p: int, n: int, seed: int, plant: bool = False) -> MaxLinsatInstance:
    """Vandermonde instance with B_ij = g^(i j) over F_p, m = p - 1 rows.

    ``g`` is the smallest primitive element; every satisfying set has
    floor(p/2) elements.
    """
    field(p)
    if not 1 <= n < p:
        raise ParameterError(f"need 1 <= n < p (got n={n}, p={p})")
    m = p - 1
    g = primitive_element(p)
    B = np.array([[pow(g, i * j, p) for j in range(n)] for i in range(m)], dtype=np.int64)
    r = p // 2
    rng = substream(seed, "opi")
    meta: dict = {"generator": "opi", "seed": seed, "params": {"p": p, "n": n, "gamma": g}}
    if p == 2:
        v = rng.integers(0, 2, m)
        if plant:
            v, x = _plant_binary(sp.csr_matrix(B), rng)
            meta["planted_x"] = x.tolist()
        return MaxLinsatInstance(2, sp.csr_matrix(B), v=v, meta=meta)
    if plant:
        x = rng.integers(0, p, n)
        target = (B @ x) % p
        sets = []
        for i in range(m):
            others = np.delete(np.arange(p), target[i])
            extra = rng.choice(others, r - 1, replace=False)
            sets.append(tuple(sorted([int(target[i]), *map(int, extra)])))
        meta["planted_x"] = x.tolist()
    else:
        sets = [tuple(sorted(map(int, rng.choice(p, r, replace=False)))) for _ in range(m)]
    return MaxLinsatInstance(p, sp.csr_matrix(B), f_sets=tuple(sets), meta=meta)


# ---------------------------------------------------------------- irregular ensembles

@dataclass(frozen=True)
class DegreeDistribution:
    """Node-perspective degree fractions for variables and constraints."""

    variable: dict[int, float]
    constraint: dict[int, float]

    def __post_init__(self) -> None:
        for side in ("variable", "constraint"):
            fr = {int(d): float(f) for d, f in getattr(self, side).items()}
            if not fr or any(d < 1 or f < 0 for d, f in fr.items()):
                raise ParameterError(f"{side} degrees must be positive with nonnegative fractions")
            total = math.fsum(fr.values())
            if abs(total - 1.0) > 1e-12:
                raise ParameterError(f"{side} fractions sum to {total!r}, not 1")
            object.__setattr__(self, side, dict(sorted(fr.items())))

    def mean_variable_degree(self) -> float:
        return math.fsum(d * f for d, f in self.variable.items())

    def mean_constraint_degree(self) -> float:
        return math.fsum(d * f for d, f in self.constraint.items())

    def to_json(self) -> dict:
        return {
            "variable": {str(d): f for d, f in self.variable.items()},
            "constraint": {str(d): f for d, f in self.constraint.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DegreeDistribution":
        return cls(
            {int(d): f for d, f in obj["variable"].items()},
            {int(d): f for d, f in obj["constraint"].items()},
        )


def load_distribution(path) -> DegreeDistribution:
    return DegreeDistribution.from_json(json.loads(Path(path).read_text()))


DEMO_DISTRIBUTION = Path(__file__).with_name("data") / "irregular_demo.json"


def demo_distribution() -> tuple[DegreeDistribution, int, int]:
    """Bundled irregular family (mixed constraint degrees 2..10) and its default (m, n)."""
    obj = json.loads(DEMO_DISTRIBUTION.read_text())
    return DegreeDistribution.from_json(obj), int(obj["m"]), int(obj["n"])


def largest_remainder_counts(total: int, fractions: dict[int, float]) -> dict[int, int]:
    """Split ``total`` nodes over degrees, rounding by largest remainder.

    Ties go to the smaller degree so the result is deterministic.
    """
    degs = list(fractions)
    exact = [total * fractions[d] for d in degs]
    counts = [math.floor(e) for e in exact]
    short = total - sum(counts)
    order = sorted(range(len(degs)), key=lambda t: (-(exact[t] - counts[t]), degs[t]))
    for t in order[:short]:
        counts[t] += 1
    return dict(zip(degs, counts))


def integer_degree_sequences(m: int, n: int, dist: DegreeDistribution, slack: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-node degrees (constraints, variables) with equal edge totals.

    After rounding, any edge surplus is removed one edge at a time from the
    nodes in the surplus side's highest-degree bucket.  ``slack`` bounds
    the allowed surplus; the default is the largest degree on either side
    plus half a percent of the edge count.
    """
    cons = largest_remainder_counts(m, dist.constraint)
    vars_ = largest_remainder_counts(n, dist.variable)
    con_deg = np.repeat(np.array(list(cons), dtype=np.int64), list(cons.values()))
    var_deg = np.repeat(np.array(list(vars_), dtype=np.int64), list(vars_.values()))
    diff = int(con_deg.sum() - var_deg.sum())
    if slack is None:
        slack = max(dist.constraint) + max(dist.variable) + int(0.005 * max(con_deg.sum(), var_deg.sum()))
    if abs(diff) > slack:
        raise ParameterError(f"edge counts disagree by {diff} (constraints minus variables), beyond slack {slack}")
    side = con_deg if diff > 0 else var_deg
    need = abs(diff)
    if need:
        top = side.max()
        idx = np.flatnonzero(side == top)
        floor_deg = max([d for d in np.unique(side) if d < top], default=1)
        room = len(idx) * (top - floor_deg)
        if need > room:
            raise ParameterError(f"cannot absorb an edge deficit of {need} in the top degree bucket")
        t = 0
        while need:
            side[idx[t % len(idx)]] -= 1
            need -= 1
            t += 1
    if con_deg.max() > n or var_deg.max() > m:
        raise ParameterError("a node degree exceeds the size of the other side")
    return con_deg, var_deg


def _configuration_edges(con_deg, var_deg, rng, max_rounds: int = 1000):
    con_stub = np.repeat(np.arange(con_deg.size), con_deg)
    var_stub = rng.permutation(np.repeat(np.arange(var_deg.size), var_deg))
    n = var_deg.size
    for _ in range(max_rounds):
        key = con_stub * n + var_stub
        order = np.argsort(key, kind="stable")
        dup = order[1:][key[order[1:]] == key[order[:-1]]]
        if dup.size == 0:
            return con_stub, var_stub
        partners = rng.integers(0, var_stub.size, dup.size)
        for a, b in zip(dup, partners):
            var_stub[a], var_stub[b] = var_stub[b], var_stub[a]
    raise ParameterError(f"duplicate edges persisted after {max_rounds} repair rounds")


def gen_irregular(m: int, n: int, dist: DegreeDistribution, seed: int, plant: bool = False, slack: int | None = None) -> MaxLinsatInstance:
    """Sample a binary instance with prescribed degree histograms.

    Stubs are matched uniformly at random; repeated (constraint, variable)
    pairs are repaired by swapping variable endpoints with random edges.
    """
    if m < n or n < 1:
        raise ParameterError(f"need m >= n >= 1 (got m={m}, n={n})")
    con_deg, var_deg = integer_degree_sequences(m, n, dist, slack)
    rng = substream(seed, "irregular")
    con_deg = rng.permutation(con_deg)
    var_deg = rng.permutation(var_deg)
    rows, cols = _configuration_edges(con_deg, var_deg, rng)
    B = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(m, n))
    meta = {"generator": "irregular", "seed": seed, "params": {"m": m, "n": n, "distribution": dist.to_json()}}
    if plant:
        v, x = _plant_binary(B, rng)
        meta["planted_x"] = x.tolist()
    else:
        v = rng.integers(0, 2, m)
    return MaxLinsatInstance(2, B, v=v, meta=meta)


def from_dense(B, p: int = 2, v=None, f_sets=None, meta: dict | None = None) -> MaxLinsatInstance:
    return MaxLinsatInstance(p, sp.csr_matrix(np.asarray(B, dtype=np.int64)), v=v, f_sets=f_sets, meta=dict(meta or {}))


# ---------------------------------------------------------------- serialization

def to_json(inst: MaxLinsatInstance) -> dict:
    B = inst.B
    rows = []
    for i in range(inst.m):
        lo, hi = B.indptr[i], B.indptr[i + 1]
        if inst.p == 2:
            rows.append([int(c) for c in B.indices[lo:hi]])
        else:
            rows.append([[int(c), int(a)] for c, a in zip(B.indices[lo:hi], B.data[lo:hi])])
    obj = {"p": inst.p, "m": inst.m, "n": inst.n, "b_rows": rows}
    if inst.p == 2:
        obj["v"] = [int(a) for a in inst.v]
    else:
        obj["f_sets"] = [list(F) for F in inst.f_sets]
    obj["meta"] = inst.meta
    return obj


def from_json(obj: dict) -> MaxLinsatInstance:
    p, m, n = int(obj["p"]), int(obj["m"]), int(obj["n"])
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for row in obj["b_rows"]:
        for entry in row:
            if p == 2:
                indices.append(int(entry))
                data.append(1)
            else:
                indices.append(int(entry[0]))
                data.append(int(entry[1]))
        indptr.append(len(indices))
    if len(indptr) != m + 1:
        raise ParameterError(f"file declares m={m} but lists {len(indptr) - 1} rows")
    B = sp.csr_matrix((np.array(data, dtype=np.int64), np.array(indices, dtype=np.int64), np.array(indptr)), shape=(m, n))
    meta = obj.get("meta", {})
    if p == 2:
        return MaxLinsatInstance(2, B, v=np.array(obj["v"]), meta=meta)
    return MaxLinsatInstance(p, B, f_sets=tuple(tuple(F) for F in obj["f_sets"]), meta=meta)


def dumps(inst: MaxLinsatInstance) -> str:
    return json.dumps(to_json(inst), separators=(",", ":"))


def save_instance(inst: MaxLinsatInstance, path) -> None:
    from .report import atomic_write_text

    atomic_write_text(path, dumps(inst) + "\n")


def load_instance(path) -> MaxLinsatInstance:
    return from_json(json.loads(Path(path).read_text()))
