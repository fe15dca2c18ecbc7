"""Prime-field arithmetic and linear algebra over F_p.

Matrices are plain integer numpy arrays holding residues in [0, p).  Over
F_2 the elimination routines pack rows into 64-bit words; for other primes
they use dense residue arithmetic.  Both paths pick pivots as the first
nonzero entry in column order, so echelon forms are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ParameterError


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class FieldCtx:
    """The prime field F_p."""

    p: int

    def __post_init__(self) -> None:
        if not is_prime(int(self.p)):
            raise ParameterError(f"modulus {self.p} is not prime")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(a, -1, self.p)


@lru_cache(maxsize=None)
def field(p: int) -> FieldCtx:
    return FieldCtx(int(p))


def residues(a, p: int) -> np.ndarray:
    """Coerce ``a`` to an int64 array reduced mod ``p``."""
    arr = np.asarray(a, dtype=np.int64)
    return np.mod(arr, p)


def mat_vec_mul(M, x, p: int = 2) -> np.ndarray:
    """Return M x mod p.  ``M`` may be dense or scipy-sparse."""
    field(p)
    x = residues(x, p)
    if M.ndim != 2 or x.ndim != 1 or M.shape[1] != x.shape[0]:
        raise ParameterError(f"shape mismatch: matrix {M.shape} times vector {x.shape}")
    if sp.issparse(M):
        return np.mod(M.astype(np.int64) @ x, p)
    return np.mod(residues(M, p) @ x, p)


# ---------------------------------------------------------------- bit packing

def pack_rows(M) -> np.ndarray:
    """Pack a 0/1 matrix into uint64 words, column c at word c//64 bit c%64."""
    M = np.asarray(M, dtype=np.uint8) & 1
    rows, cols = M.shape
    words = max(1, (cols + 63) // 64)
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :cols] = M
    as_bytes = np.packbits(padded.reshape(rows, words * 8, 8)[:, :, ::-1], axis=2)
    return np.ascontiguousarray(as_bytes.reshape(rows, words * 8).view("<u8"), dtype=np.uint64)


def unpack_rows(packed: np.ndarray, cols: int) -> np.ndarray:
    rows, words = packed.shape
    as_bytes = np.ascontiguousarray(packed, dtype="<u8").view(np.uint8).reshape(rows, words * 8, 1)
    bits = np.unpackbits(as_bytes, axis=2)[:, :, ::-1].reshape(rows, words * 64)
    return bits[:, :cols].astype(np.int64)


# ---------------------------------------------------------------- elimination

@dataclass(frozen=True)
class Echelon:
    """Reduced row-echelon form R of a matrix M.

    ``transform`` (when requested) is an invertible T with T M = R mod p.
    """

    matrix: np.ndarray
    rank: int
    pivots: tuple[int, ...]
    transform: np.ndarray | None = None


def _rref_generic(M: np.ndarray, p: int, pivot_limit: int) -> tuple[np.ndarray, list[int]]:
    R = residues(M, p).copy()
    rows = R.shape[0]
    pivots: list[int] = []
    r = 0
    for col in range(pivot_limit):
        if r == rows:
            break
        hits = np.flatnonzero(R[r:, col])
        if hits.size == 0:
            continue
        src = r + int(hits[0])
        if src != r:
            R[[r, src]] = R[[src, r]]
        R[r] = (R[r] * pow(int(R[r, col]), -1, p)) % p
        factors = R[:, col].copy()
        factors[r] = 0
        nz = np.flatnonzero(factors)
        if nz.size:
            R[nz] = (R[nz] - factors[nz, None] * R[r]) % p
        pivots.append(col)
        r += 1
    return R, pivots


def _rref_packed(M: np.ndarray, pivot_limit: int) -> tuple[np.ndarray, list[int]]:
    cols = M.shape[1]
    packed = pack_rows(M)
    piv = kernels.gf2_rref(packed, pivot_limit)
    return unpack_rows(packed, cols), [int(c) for c in piv]


def row_echelon(M, p: int = 2, transform: bool = False, method: str = "auto") -> Echelon:
    """Reduced row-echelon form of ``M`` over F_p.

    ``method`` is "packed" (F_2 only), "generic", or "auto" (packed when
    p = 2).  With ``transform=True`` the elimination is run on [M | I] and
    the right block is returned as the transform.
    """
    field(p)
    M = np.asarray(M.toarray() if sp.issparse(M) else M)
    M = residues(M, p)
    rows, cols = M.shape
    work = np.hstack([M, np.eye(rows, dtype=np.int64)]) if transform else M
    if method == "auto":
        method = "packed" if p == 2 else "generic"
    if method == "packed":
        if p != 2:
            raise ParameterError("bit-packed elimination needs p = 2")
        R, piv = _rref_packed(work, cols)
    elif method == "generic":
        R, piv = _rref_generic(work, p, cols)
    else:
        raise ParameterError(f"unknown method {method!r}")
    T = R[:, cols:].copy() if transform else None
    return Echelon(R[:, :cols].copy(), len(piv), tuple(piv), T)


def rank(M, p: int = 2) -> int:
    return row_echelon(M, p).rank


def nullspace_basis(M, p: int = 2) -> np.ndarray:
    """Basis of {v : M v = 0} as rows of a (cols - rank) x cols array."""
    ech = row_echelon(M, p)
    cols = ech.matrix.shape[1]
    piv = list(ech.pivots)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for i, pc in enumerate(piv):
            basis[t, pc] = (-ech.matrix[i, f]) % p
    return basis


def solve_particular(M, s, p: int = 2) -> np.ndarray | None:
    """Some y with M y = s over F_p, or None when the system is inconsistent.

    Free variables are set to zero.
    """
    field(p)
    M = np.asarray(M.toarray() if sp.issparse(M) else M)
    s = residues(s, p)
    rows, cols = M.shape
    if s.shape != (rows,):
        raise ParameterError(f"right-hand side has shape {s.shape}, expected ({rows},)")
    aug = np.hstack([residues(M, p), s[:, None]])
    if p == 2:
        R, piv = _rref_packed(aug, cols)
    else:
        R, piv = _rref_generic(aug, p, cols)
    if np.any(R[len(piv):, cols]):
        return None
    y = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        y[c] = R[i, cols]
    return y
