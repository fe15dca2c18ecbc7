import numpy as np
import pytest

from dqibench import decoders, gf, instances
from dqibench.errors import GateError, NumericError, ParameterError


def test_poly_helpers():
    p = 7
    q, r = decoders.poly_divmod([6, 5, 1], [1, 1], p)  # (x+1)(x+...)
    num = np.convolve(q, [1, 1]) % p
    num = list(num) + [0] * (3 - len(num))
    rem = list(r) + [0] * (3 - len(r))
    assert [(a + b) % p for a, b in zip(num, rem)] == [6, 5, 1]
    assert decoders.poly_eval([1, 2, 3], np.arange(7), 7).tolist() == [(1 + 2 * x + 3 * x * x) % 7 for x in range(7)]


def test_bw_zero_syndrome():
    inst = instances.gen_opi(13, 4, seed=0)
    out = decoders.bw_decode(inst, np.zeros(4, dtype=int), 2)
    assert out.ok and not np.any(out.error)


def test_bw_single_and_double_errors():
    inst = instances.gen_opi(13, 4, seed=1)
    est1 = decoders.failure_rate("bw", inst, 1, 1000, seed=1)
    est2 = decoders.failure_rate("bw", inst, 2, 1000, seed=2)
    assert est1.failures == est2.failures == 0


def test_bw_above_radius_never_lies():
    """Weight cap+1 errors: failure, ambiguity or a different low-weight preimage, all re-verified."""
    inst = instances.gen_opi(13, 4, seed=2)
    BT = inst.dense().T % 13
    rng = np.random.default_rng(2)
    statuses = set()
    for _ in range(300):
        y = np.zeros(inst.m, dtype=np.int64)
        pos = rng.choice(inst.m, 3, replace=False)
        y[pos] = rng.integers(1, 13, 3)
        s = BT @ y % 13
        out = decoders.bw_decode(inst, s, 2)
        statuses.add(out.status)
        if out.ok:
            assert np.array_equal(BT @ out.error % 13, s)
            assert np.count_nonzero(out.error) <= 2
    assert statuses <= {decoders.SUCCESS, decoders.FAILURE, decoders.AMBIGUOUS}
    assert decoders.FAILURE in statuses


def test_bw_odd_n_extended_radius_reports_ambiguity():
    inst = instances.gen_opi(7, 3, seed=3)
    est = decoders.failure_rate("bw", inst, 2, 300, seed=3)
    outs = set()
    BT = inst.dense().T % 7
    rng = np.random.default_rng(3)
    for _ in range(200):
        y = np.zeros(inst.m, dtype=np.int64)
        pos = rng.choice(inst.m, 2, replace=False)
        y[pos] = rng.integers(1, 7, 2)
        out = decoders.bw_decode(inst, BT @ y % 7, 2)
        outs.add(out.status)
        if out.ok:
            assert np.array_equal(out.error, y)
    assert est.wrong_valid == 0
    assert decoders.AMBIGUOUS in outs


def test_bw_rejects_large_cap():
    inst = instances.gen_opi(7, 2, seed=0)
    with pytest.raises(ParameterError):
        decoders.bw_decode(inst, [0, 0], 3)


@pytest.fixture(scope="module")
def gallager36():
    return instances.gen_gallager(3, 6, 200, seed=21)


def test_bp_zero_syndrome(gallager36):
    for cfg in (decoders.BpConfig(0.01), decoders.BpConfig(0.2, min_sum=True, damping=0.3)):
        out = decoders.bp_decode(gallager36.BT, np.zeros(gallager36.n, dtype=int), cfg)
        assert out.ok and out.iterations == 0 and not np.any(out.error)


def test_bp_single_flip(gallager36):
    est = decoders.failure_rate("bp", gallager36, 1, 500, seed=4)
    assert 1 - est.rate >= 0.99


def test_bp_high_weight_saturates(gallager36):
    est = decoders.failure_rate("bp", gallager36, 200, 40, seed=5)
    assert est.rate >= 0.9


def test_bp_min_sum_works(gallager36):
    cfg = decoders.BpConfig(0.03, min_sum=True)
    est = decoders.failure_rate("bp", gallager36, 30, 50, seed=6, cfg=cfg)
    assert est.rate <= 0.1


def test_failure_rate_reproducible(gallager36):
    a = decoders.failure_rate("bp", gallager36, 90, 50, seed=7)
    b = decoders.failure_rate("bp", gallager36, 90, 50, seed=7)
    assert a == b
    assert a.ci_low <= a.rate <= a.ci_high


def test_failure_rate_catches_lying_decoder(gallager36):
    def liar(s):
        return decoders.DecodeOutcome(decoders.SUCCESS, np.ones(gallager36.m, dtype=np.int64), 1)

    with pytest.raises(GateError):
        decoders.failure_rate(liar, gallager36, 3, 5, seed=0)


def test_bp_config_validation():
    with pytest.raises(ParameterError):
        decoders.BpConfig(0.0)
    with pytest.raises(ParameterError):
        decoders.BpConfig(0.1, max_iter=0)


def test_density_evolution_regular():
    dist = instances.DegreeDistribution({6: 1.0}, {3: 1.0})
    th = decoders.density_evolution_threshold(dist, samples=20_000)
    assert 0.07 <= th.q <= 0.10
    lower_rate = instances.DegreeDistribution({4: 1.0}, {3: 1.0})
    assert decoders.density_evolution_threshold(lower_rate, samples=20_000).q > th.q


def test_density_evolution_demo_family_reported():
    dist, _, _ = instances.demo_distribution()
    th = decoders.density_evolution_threshold(dist, samples=20_000)
    assert 0 < th.lo <= th.q <= th.hi < 0.5


def test_density_evolution_bracket_errors():
    dist = instances.DegreeDistribution({6: 1.0}, {3: 1.0})
    with pytest.raises(NumericError):
        decoders.density_evolution_threshold(dist, samples=5_000, bracket=(0.2, 0.3))


def test_alist_export():
    H = np.array([[1, 1, 0, 1], [0, 1, 1, 0]])
    text = decoders.to_alist(H).splitlines()
    assert text[0] == "4 2"
    assert text[1] == "2 3"
    assert text[2] == "1 2 1 1"
    assert text[3] == "3 2"
    assert text[4:8] == ["1 0", "1 2", "2 0", "1 0"]
    assert text[8:] == ["1 2 4", "2 3 0"]
