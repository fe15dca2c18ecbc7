import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from dqibench import gf
from dqibench.errors import ParameterError


def span_size(M, p):
    """Brute-force size of the row space of a tiny matrix over F_p."""
    M = np.asarray(M) % p
    seen = set()
    for coeffs in itertools.product(range(p), repeat=M.shape[0]):
        seen.add(tuple((np.asarray(coeffs) @ M) % p))
    return len(seen)


def test_primality_and_field_inverse():
    assert [q for q in range(20) if gf.is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]
    with pytest.raises(ParameterError):
        gf.field(9)
    F = gf.field(13)
    assert all(a * F.inv(a) % 13 == 1 for a in range(1, 13))
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_mat_vec_examples():
    assert gf.mat_vec_mul(np.eye(3, dtype=int), [1, 0, 1]).tolist() == [1, 0, 1]
    BT = np.array([[1, 1, 0], [0, 1, 1]])
    assert gf.mat_vec_mul(BT, [1, 1, 0]).tolist() == [0, 1]
    V = np.array([[pow(3, i * j, 7) for j in range(2)] for i in range(6)])
    assert gf.mat_vec_mul(V, [1, 1], 7).tolist() == [(1 + 3**i) % 7 for i in range(6)]
    assert gf.mat_vec_mul(sp.csr_matrix(BT), [1, 1, 0]).tolist() == [0, 1]
    with pytest.raises(ValueError):
        gf.mat_vec_mul(BT, [1, 1])


def test_row_echelon_examples():
    assert gf.row_echelon(np.zeros((3, 4), dtype=int)).rank == 0
    ech = gf.row_echelon(np.eye(4, dtype=int), 5)
    assert ech.rank == 4 and np.array_equal(ech.matrix, np.eye(4))
    ech = gf.row_echelon(np.array([[1, 1], [1, 1]]))
    assert ech.rank == 1 and ech.pivots == (0,)


def test_nullspace_examples():
    N = gf.nullspace_basis(np.array([[1, 1, 1]]))
    assert N.shape == (2, 3)
    assert span_size(N, 2) == 4 and not np.any(N @ [1, 1, 1] % 2)
    assert gf.nullspace_basis(np.eye(3, dtype=int)).shape[0] == 0
    N = gf.nullspace_basis(np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]]))
    assert N.tolist() == [[1, 1, 1, 1]]


def test_solve_particular_examples():
    M = np.array([[1, 1, 0], [0, 1, 1]])
    assert gf.solve_particular(M, [0, 0]).tolist() == [0, 0, 0]
    s = np.array([2, 0, 4])
    assert gf.solve_particular(np.eye(3, dtype=int), s, 5).tolist() == s.tolist()
    y = gf.solve_particular(M, [1, 0])
    assert gf.mat_vec_mul(M, y).tolist() == [1, 0]
    assert gf.solve_particular(np.array([[1, 1], [1, 1]]), [1, 0]) is None


def test_pack_roundtrip():
    rng = np.random.default_rng(0)
    for cols in (1, 63, 64, 65, 200):
        M = rng.integers(0, 2, (7, cols))
        assert np.array_equal(gf.unpack_rows(gf.pack_rows(M), cols), M)


def test_packed_and_generic_agree_on_1000_matrices():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        r, c = int(rng.integers(1, 65)), int(rng.integers(1, 129))
        M = (rng.random((r, c)) < rng.uniform(0.05, 0.6)).astype(np.int64)
        a = gf.row_echelon(M, 2, method="packed")
        b = gf.row_echelon(M, 2, method="generic")
        assert a.rank == b.rank and a.pivots == b.pivots
        assert np.array_equal(a.matrix, b.matrix)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_echelon_invariants(p, r, c, seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(0, p, (r, c))
    ech = gf.row_echelon(M, p, transform=True)
    assert np.array_equal(ech.transform @ M % p, ech.matrix)
    assert ech.rank == gf.rank(M.T, p)
    N = gf.nullspace_basis(M, p)
    assert N.shape == (c - ech.rank, c)
    assert not np.any(M @ N.T % p)
    if r * 1 <= 4 and p ** r <= 2500:
        assert p ** ech.rank == span_size(M, p)
    s = M @ rng.integers(0, p, c) % p
    y = gf.solve_particular(M, s, p)
    assert y is not None and np.array_equal(M @ y % p, s)
