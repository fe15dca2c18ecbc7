import itertools
import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from dqibench import gf, instances
from dqibench.errors import ParameterError


def test_gallager_single_layer_is_permutation():
    BT = instances.gen_gallager(1, 1, 3, seed=0).BT.toarray()
    assert BT.shape == (3, 3)
    assert np.array_equal(BT.sum(axis=0), [1, 1, 1]) and np.array_equal(BT.sum(axis=1), [1, 1, 1])


def test_gallager_degrees_and_layers():
    inst = instances.gen_gallager(2, 3, 4, seed=1)
    BT = inst.BT.toarray()
    assert BT.shape == (8, 12)
    assert set(BT.sum(axis=1)) == {3} and set(BT.sum(axis=0)) == {2}
    assert BT.sum() == 4 * 2 * 3
    for layer in range(2):
        block = BT[layer * 4 : (layer + 1) * 4]
        assert np.array_equal(block.sum(axis=0), np.ones(12))


def test_gallager_deterministic():
    a = instances.gen_gallager(3, 6, 50, seed=9)
    b = instances.gen_gallager(3, 6, 50, seed=9)
    c = instances.gen_gallager(3, 6, 50, seed=10)
    assert a == b and a != c


def test_gallager_rejects_bad_params():
    with pytest.raises(ParameterError):
        instances.gen_gallager(3, 2, 10, seed=0)
    with pytest.raises(ParameterError):
        instances.gen_gallager(0, 2, 10, seed=0)


def test_planted_gallager_satisfiable():
    inst = instances.gen_gallager(3, 4, 20, seed=2, plant=True)
    x = np.array(inst.meta["planted_x"])
    assert instances.satisfied_count(inst, x) == inst.m


def test_primitive_elements():
    assert instances.primitive_element(7) == 3
    assert instances.primitive_element(2) == 1
    assert instances.primitive_element(11) == 2
    for p in (3, 5, 7, 11, 13, 17):
        g = instances.primitive_element(p)
        assert {pow(g, e, p) for e in range(1, p)} == set(range(1, p))


def test_opi_shape_and_sets():
    inst = instances.gen_opi(7, 2, seed=0)
    assert (inst.m, inst.n) == (6, 2)
    assert inst.dense().tolist() == [[pow(3, i * j, 7) for j in range(2)] for i in range(6)]
    assert all(len(F) == 3 for F in inst.f_sets)
    planted = instances.gen_opi(13, 4, seed=1, plant=True)
    x = np.array(planted.meta["planted_x"])
    assert instances.satisfied_count(planted, x) == planted.m
    assert instances.objective(planted, x) == planted.m


def _min_weight_brute(BT, p):
    """Smallest support of a nonzero y with BT y = 0 (column-subset search)."""
    n, m = BT.shape
    for w in range(1, m + 1):
        for S in itertools.combinations(range(m), w):
            if gf.rank(BT[:, S], p) < w:
                return w
    return None


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_opi_dual_is_mds(p):
    for n in sorted({1, (p - 1) // 2, p - 2}):
        if n < 1:
            continue
        BT = instances.gen_opi(p, n, seed=0).dense().T % p
        assert gf.rank(BT, p) == n
        assert _min_weight_brute(BT, p) == n + 1


def test_opi_dual_distance_by_codeword_enumeration():
    for p, n in ((5, 2), (7, 3), (7, 4), (11, 8)):
        BT = instances.gen_opi(p, n, seed=0).dense().T % p
        N = gf.nullspace_basis(BT, p)
        assert N.shape[0] == p - 1 - n
        best = min(
            np.count_nonzero(np.asarray(c) @ N % p)
            for c in itertools.product(range(p), repeat=N.shape[0])
            if any(c)
        )
        assert best == n + 1


def test_satisfied_count_matches_row_scan():
    inst = instances.gen_opi(7, 3, seed=4)
    rng = np.random.default_rng(4)
    B = inst.dense()
    for _ in range(20):
        x = rng.integers(0, 7, 3)
        scan = sum(int(sum(B[i, j] * x[j] for j in range(3)) % 7 in inst.f_sets[i]) for i in range(inst.m))
        assert instances.satisfied_count(inst, x) == scan
        assert instances.objective(inst, x) == 2 * scan - inst.m


def test_binary_counts_by_hand():
    inst = instances.from_dense(np.eye(3, dtype=int), 2, [1, 0, 1])
    assert instances.satisfied_count(inst, [1, 0, 1]) == 3
    assert instances.satisfied_count(inst, [0, 0, 0]) == 1
    assert instances.satisfied_count(inst, [0, 1, 0]) == 0


def test_invariants_rejected():
    with pytest.raises(ParameterError):
        instances.from_dense(np.ones((2, 3), dtype=int), 2, [0, 0])
    with pytest.raises(ParameterError):
        instances.from_dense(np.eye(2, dtype=int), 4, f_sets=[(0,), (1,)])
    with pytest.raises(ParameterError):
        instances.from_dense(np.eye(2, dtype=int), 3, f_sets=[(0, 1, 2), (1,)])
    with pytest.raises(ParameterError):
        instances.from_dense(np.eye(2, dtype=int), 3, f_sets=[(1, 0), (1,)])
    with pytest.raises(ParameterError):
        instances.from_dense(np.eye(2, dtype=int), 2, [1, 1], meta={"planted_x": [0, 0]})


def test_distribution_validation():
    with pytest.raises(ParameterError):
        instances.DegreeDistribution({3: 0.99}, {6: 1.0})
    d = instances.DegreeDistribution({3: 0.5, 4: 0.5}, {6: 1.0})
    assert instances.DegreeDistribution.from_json(json.loads(json.dumps(d.to_json()))) == d


def test_largest_remainder():
    counts = instances.largest_remainder_counts(10, {2: 1 / 3, 3: 1 / 3, 4: 1 / 3})
    assert sum(counts.values()) == 10 and counts == {2: 4, 3: 3, 4: 3}


def test_irregular_regular_limit():
    dist = instances.DegreeDistribution({6: 1.0}, {3: 1.0})
    inst = instances.gen_irregular(600, 300, dist, seed=3)
    assert set(inst.constraint_degrees()) == {3} and set(inst.variable_degrees()) == {6}
    assert inst.B.max() == 1


def test_irregular_matches_integer_sequence():
    dist, m, n = instances.demo_distribution()
    inst = instances.gen_irregular(m, n, dist, seed=5)
    con, var = instances.integer_degree_sequences(m, n, dist)
    assert sorted(inst.constraint_degrees()) == sorted(con)
    assert sorted(inst.variable_degrees()) == sorted(var)
    assert inst.B.max() == 1


def test_irregular_full_scale_smoke():
    dist = instances.DegreeDistribution({4: 0.195, 5: 0.805}, {3: 1.0})
    inst = instances.gen_irregular(50_000, 31_216, dist, seed=0)
    assert (inst.m, inst.n) == (50_000, 31_216)


def test_irregular_rejects_inconsistent_edges():
    dist = instances.DegreeDistribution({2: 1.0}, {10: 1.0})
    with pytest.raises(ParameterError):
        instances.gen_irregular(100, 60, dist, seed=0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["gallager", "opi", "irregular"]), st.integers(0, 1000), st.booleans())
def test_serialization_roundtrip(kind, seed, plant):
    if kind == "gallager":
        inst = instances.gen_gallager(3, 4, 10, seed, plant=plant)
    elif kind == "opi":
        inst = instances.gen_opi(11, 3, seed, plant=plant)
    else:
        inst = instances.gen_irregular(60, 30, instances.DegreeDistribution({4: 1.0}, {2: 1.0}), seed, plant=plant)
    text = instances.dumps(inst)
    back = instances.from_json(json.loads(text))
    assert back == inst and instances.dumps(back) == text


def test_save_load(tmp_path):
    inst = instances.gen_opi(13, 4, seed=2, plant=True)
    path = tmp_path / "i.json"
    instances.save_instance(inst, path)
    assert instances.load_instance(path) == inst
    obj = json.loads(path.read_text())
    assert {"p", "m", "n", "b_rows", "f_sets", "meta"} <= set(obj)


def test_sparse_dense_agree():
    inst = instances.gen_gallager(3, 6, 10, seed=0)
    assert np.array_equal(inst.dense(), inst.B.toarray())
    assert np.array_equal(inst.BT.toarray(), inst.dense().T)
    assert sp.issparse(inst.B)
