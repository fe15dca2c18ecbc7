import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from dqibench import instances, oracle, spectrum, weights
from dqibench.errors import CapacityError, ParameterError


def repetition_dual_instance():
    B = np.array([[1, 0, 0], [1, 1, 0], [0, 1, 1], [0, 0, 1]])
    return instances.from_dense(B, 2, [0, 1, 1, 0])


def small_planted(rng, m=8, n=4):
    while True:
        B = rng.integers(0, 2, (m, n))
        if not np.any(B.sum(axis=1) == 0):
            return instances.from_dense(B, 2, (B @ rng.integers(0, 2, n)) % 2)


def test_g_transform_binary():
    inst = repetition_dual_instance()
    g = oracle.g_transform(inst)
    f = 2.0 * inst.allowed - 1
    assert np.allclose(g.values, f / math.sqrt(2))
    assert g.uniform_r


@pytest.mark.parametrize("p", [3, 5, 7])
def test_g_transform_normalized(p):
    inst = instances.gen_opi(p, 1, seed=0)
    g = oracle.g_transform(inst).values
    assert np.allclose(g.sum(axis=1), 0, atol=1e-15)
    assert np.allclose((g**2).sum(axis=1), 1, atol=1e-15)


def test_g_transform_mirror():
    B = np.ones((2, 1), dtype=int)
    one = instances.from_dense(B, 5, f_sets=[(0,), (3,)])
    mirror = instances.from_dense(B, 5, f_sets=[(1, 2, 3, 4), (0, 1, 2, 4)])
    assert np.allclose(oracle.g_transform(one).values, -oracle.g_transform(mirror).values)


def test_elementary_symmetric_matches_subset_sums():
    rng = np.random.default_rng(0)
    for m in range(1, 9):
        vals = rng.normal(size=(3, m))
        E = oracle.elementary_symmetric(vals, m)
        for k in range(m + 1):
            direct = [sum(np.prod(row[list(S)]) for S in itertools.combinations(range(m), k)) for row in vals]
            assert np.allclose(E[:, k], direct, atol=1e-12)


def test_degree_zero_is_uniform():
    inst = small_planted(np.random.default_rng(1))
    st = oracle.amplitudes(inst, 0, [1.0])
    assert np.allclose(st.amplitudes, st.amplitudes[0])
    ex = oracle.exact_expectation(st)
    assert ex.s == pytest.approx(inst.m / 2, abs=1e-12)
    opi = instances.gen_opi(7, 2, seed=3)
    ex = oracle.exact_expectation(oracle.amplitudes(opi, 0, [1.0]))
    assert ex.s == pytest.approx(opi.m * 3 / 7, abs=1e-12)


def test_small_instance_expectation_matches_tridiagonal():
    inst = repetition_dual_instance()
    assert weights.dual_distribution(inst).d_min == 4
    frac, w = spectrum.optimal_fraction(4, 1, 2, 1)
    ex = oracle.exact_expectation(oracle.amplitudes(inst, 1, w))
    assert ex.s == pytest.approx(3.0, abs=1e-12)
    assert ex.s == pytest.approx(spectrum.expected_satisfied(4, 1, 2, 1, w), abs=1e-12)
    assert ex.norm2 == pytest.approx(1.0, abs=1e-12)
    A = weights.dual_distribution(inst)
    E = weights.expectation_matrix(4, 1, A)
    assert ex.s == pytest.approx(2 + w @ E @ w, abs=1e-9)


@pytest.mark.parametrize("p,n", [(5, 3), (7, 3), (11, 5)])
def test_prime_field_protected_regime(p, n):
    inst = instances.gen_opi(p, n, seed=p)
    r = p // 2
    rng = np.random.default_rng(p)
    for l in range(0, n // 2 + 1):
        if 2 * l + 1 >= n + 1:
            continue
        for w in (spectrum.optimal_fraction(inst.m, l, p, r)[1], rng.normal(size=l + 1)):
            w = w / np.linalg.norm(w)
            st = oracle.amplitudes(inst, l, w)
            ex = oracle.exact_expectation(st)
            assert ex.norm2 == pytest.approx(1.0, abs=1e-9)
            assert ex.s == pytest.approx(spectrum.expected_satisfied(inst.m, l, p, r, w), abs=1e-9)
            assert st.amplitudes.dtype == np.float64 and np.all(np.isfinite(st.amplitudes))


def test_amplitude_equals_polynomial_of_objective():
    rng = np.random.default_rng(2)
    for inst in (small_planted(rng, 7, 3), instances.gen_opi(5, 2, seed=1)):
        p, m, n = inst.p, inst.m, inst.n
        r = int(inst.allowed[0].sum())
        for l in (1, 2, 3):
            coeffs = [Fraction(int(c)) for c in rng.integers(-3, 4, l + 1)]
            coeffs[-1] = coeffs[-1] or Fraction(1)
            _, w = oracle.poly_to_weights(coeffs, m, p, r, n)
            st = oracle.amplitudes(inst, l, w)
            X = np.array([oracle.index_to_assignment(i, n, p) for i in range(p**n)])
            fvals = np.array([instances.objective(inst, x) for x in X], dtype=float)
            expect = sum(float(c) * fvals**k for k, c in enumerate(coeffs))
            assert np.allclose(st.amplitudes, expect, atol=1e-8 * max(1, np.abs(expect).max()))


def test_indicator_polynomial_peaks_at_planted():
    rng = np.random.default_rng(3)
    B = rng.integers(0, 2, (6, 3))
    B[B.sum(axis=1) == 0, 0] = 1
    xstar = np.array([1, 0, 1])
    inst = instances.from_dense(B, 2, (B @ xstar) % 2, meta={"planted_x": xstar.tolist()})
    m = inst.m
    roots = [m - 2 * t for t in range(1, m + 1)]
    coeffs = [Fraction(int(round(c))) for c in np.polynomial.polynomial.polyfromroots(roots)]
    _, w = oracle.poly_to_weights(coeffs, m, 2, 1, inst.n)
    st = oracle.amplitudes(inst, m, w)
    best = int(np.argmax(np.abs(st.amplitudes)))
    assert instances.satisfied_count(inst, oracle.index_to_assignment(best, 3, 2)) == m
    peak = np.abs(st.amplitudes).max()
    others = [abs(a) for i, a in enumerate(st.amplitudes) if instances.satisfied_count(inst, oracle.index_to_assignment(i, 3, 2)) < m]
    assert max(others) <= 1e-6 * peak


def test_permutation_invariance():
    rng = np.random.default_rng(4)
    inst = instances.gen_opi(7, 3, seed=4)
    perm = rng.permutation(inst.m)
    B = inst.dense()[perm]
    sets = [inst.f_sets[i] for i in perm]
    other = instances.from_dense(B, 7, f_sets=sets)
    w = rng.normal(size=3)
    assert np.allclose(oracle.amplitudes(inst, 2, w).amplitudes, oracle.amplitudes(other, 2, w).amplitudes, atol=1e-12)


def test_fourier_shell_normalization():
    """Sum over weight-k Fourier supports of prod |g_hat|^2 is C(m, k)."""
    inst = instances.gen_opi(5, 2, seed=0)
    g = oracle.g_transform(inst).values
    p, m = 5, inst.m
    omega = np.exp(2j * np.pi / p)
    F = np.array([[omega ** (a * z) for z in range(p)] for a in range(p)]) / math.sqrt(p)
    ghat2 = np.abs(g @ F.T) ** 2  # (m, p), column a is |g_hat_i(a)|^2
    assert np.allclose(ghat2[:, 0], 0, atol=1e-15)
    for k in range(m + 1):
        total = 0.0
        for support in itertools.combinations(range(m), k):
            for vals in itertools.product(range(1, p), repeat=k):
                total += np.prod([ghat2[i, a] for i, a in zip(support, vals)])
        assert total == pytest.approx(math.comb(m, k), rel=1e-12)


def test_sampling():
    inst = repetition_dual_instance()
    st = oracle.amplitudes(inst, 1, spectrum.optimal_fraction(4, 1, 2, 1)[1])
    a = oracle.sample(st, 1000, seed=3)
    b = oracle.sample(st, 1000, seed=3)
    assert np.array_equal(a, b)
    rng = np.random.default_rng(5)
    big = small_planted(rng, 10, 6)
    l = 2
    st = oracle.amplitudes(big, l, rng.normal(size=l + 1))
    shots = oracle.sample(st, 100_000, seed=9)
    s = st.satisfied[shots]
    exact = oracle.exact_expectation(st).s
    assert abs(s.mean() - exact) <= 4 * s.std() / math.sqrt(s.size)


def test_single_nonzero_amplitude_sampling():
    table = oracle.AliasTable([0, 0, 3.0, 0])
    assert set(table.draw(np.random.default_rng(0), 500)) == {2}


def test_budget_and_zero_state():
    inst = instances.gen_gallager(3, 4, 10, seed=0)
    with pytest.raises(CapacityError):
        oracle.amplitudes(inst, 1, [1.0, 0.0])
    small = repetition_dual_instance()
    with pytest.raises(ParameterError):
        oracle.exact_expectation(oracle.amplitudes(small, 1, [0.0, 0.0]))


def test_export(tmp_path):
    import json

    st = oracle.amplitudes(repetition_dual_instance(), 1, [0.6, 0.8])
    st.export(tmp_path / "amp.bin")
    data = np.frombuffer((tmp_path / "amp.bin").read_bytes(), dtype="<f8")
    assert np.array_equal(data, st.amplitudes)
    header = json.loads((tmp_path / "amp.bin.json").read_text())
    assert header["count"] == 8 and header["n"] == 3


def test_poly_to_weights_examples():
    u, _ = oracle.poly_to_weights([0, 1], 10, 2, 1, 5)
    assert u == [0, 1]
    u, _ = oracle.poly_to_weights([0, 0, 1], 10, 2, 1, 5)
    assert u == [10, 0, 2]


def test_poly_roundtrip():
    rng = np.random.default_rng(6)
    m, n = 10, 6
    for _ in range(10):
        deg = int(rng.integers(0, 5))
        coeffs = [Fraction(int(c)) for c in rng.integers(-5, 6, deg + 1)]
        _, w = oracle.poly_to_weights(coeffs, m, 2, 1, n)
        back = oracle.weights_to_poly(w, m, 2, 1, n)
        assert np.allclose(back, [float(c) for c in coeffs], atol=1e-8)


def test_poly_rejects_bad_degree():
    with pytest.raises(ParameterError):
        oracle.poly_to_weights([1, 2, 3, 4], 2, 2, 1, 1)


def test_krawtchouk_values():
    for m in (5, 8):
        for t in range(m + 1):
            signs = [-1] * t + [1] * (m - t)
            for k in range(m + 1):
                direct = sum(np.prod([signs[i] for i in S]) for S in itertools.combinations(range(m), k))
                assert oracle.krawtchouk(k, t, m) == direct


def test_fidelity_bound():
    assert oracle.fidelity_bound(0, 0) == 0.8
    assert oracle.fidelity_bound(0.6, 0.5) == 0
    assert oracle.fidelity_bound(0.1, 0.2) == pytest.approx(0.8 * 0.49)
    with pytest.raises(ParameterError):
        oracle.fidelity_bound(-0.1, 0)
