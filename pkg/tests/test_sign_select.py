import json
import math

import numpy as np
import pytest

from iunorm.norm_core import DiscreteFunction, m_norm_exact
from iunorm.random_ensemble import FunctionSystem
from iunorm.sign_select import (LemmaInstance, _min_ratio, dyadic_bound, dyadic_level, problem18_lhs,
                                search_signs, sharpness_seminorm, sharpness_witness, verify_18)
from iunorm.experiments import sign_system

FOUR = DiscreteFunction.uniform([4, 3, 2, 1])


def euclid(v):
    return float(np.linalg.norm(v))


def test_problem18_examples():
    assert problem18_lhs(DiscreteFunction.from_atoms([(1, 0.5), (0, 0.5)]), 1) == 1
    assert problem18_lhs(FOUR, 1) == pytest.approx(3.5)
    assert problem18_lhs(FOUR, 2) == pytest.approx(4)
    with pytest.raises(ValueError):
        problem18_lhs(FOUR, 3)
    with pytest.raises(ValueError):
        problem18_lhs(FOUR, 0)


def test_problem18_monotonicity_and_subset_dominance():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.standard_normal(64) * rng.uniform(0.5, 3)
        lhs = [problem18_lhs(x, k) for k in range(1, 7)]
        assert np.all(np.diff(lhs) >= -1e-12)
        integrals = [v * 2.0 ** -k for k, v in enumerate(lhs, start=1)]
        assert np.all(np.diff(integrals) <= 1e-12)
        k = int(rng.integers(1, 7))
        e = rng.choice(64, size=64 // 2 ** k, replace=False)
        assert np.mean(np.abs(x[e])) <= lhs[k - 1] + 1e-12


def test_verify18_constant_function():
    n = 16
    cert = verify_18(np.full(64, math.sqrt(n)), n, 4, c0=1.0)
    assert [r.passed for r in cert.rows] == [True, False, False, False]
    assert all(r.lhs == pytest.approx(4.0) for r in cert.rows)
    assert cert.bridge_ok


def test_verify18_zero_target_and_bridge():
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.standard_normal(128) ** 3
        cert = verify_18(x, 32, 5, c0=0.0)
        assert cert.passed and cert.bridge_ok
        for r in cert.rows:
            assert m_norm_exact(DiscreteFunction.uniform(x), 2 ** r.k) <= 2 * r.lhs + 1e-12


def test_min_ratio_helper_matches_certificate():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(100)
    assert _min_ratio(x, 10, 3) == pytest.approx(verify_18(x, 10, 3, 0.0).min_ratio(), rel=1e-12)


def test_search_signs_single_function():
    fs = FunctionSystem(np.array([[2.0, 0.0, 1.0, 1.0]])).l1_normalized()
    cert = search_signs(fs, 8, c0=0.1, seed=0, k_max=1)
    assert len(cert.theta) == 1 and cert.theta[0] in (-1, 1)
    assert cert.rows[0].lhs == pytest.approx(problem18_lhs(fs.values[0], 1))


def test_search_signs_dominates_fixed_signs():
    fs = sign_system(64)
    cert = search_signs(fs, 300, c0=0.05, seed=4)
    assert cert.attempts_bridge_ok
    scores = []
    for i in range(300):
        theta = np.random.default_rng([4, i]).choice(np.array([-1.0, 1.0]), size=64)
        scores.append(verify_18(fs.combine(theta), 64, 6, 0.05).min_ratio())
    assert cert.min_ratio() == pytest.approx(max(scores), rel=1e-12)
    assert cert.attempt == int(np.argmax(scores))


def test_search_signs_deterministic_and_refine():
    fs = sign_system(32)
    a = search_signs(fs, 50, 0.05, seed=9)
    assert a == search_signs(fs, 50, 0.05, seed=9, threads=4)
    b = search_signs(fs, 50, 0.05, seed=9, refine=True)
    assert b.min_ratio() >= a.min_ratio() - 1e-12


def test_search_signs_gate():
    with pytest.raises(ValueError):
        search_signs(FunctionSystem.cosine(8), 10, 0.05, seed=0)
    with pytest.raises(ValueError):
        search_signs(sign_system(8), 0, 0.05, seed=0)


def test_certificate_json(tmp_path):
    cert = search_signs(sign_system(16), 10, 0.05, seed=1)
    path = tmp_path / "cert.json"
    cert.write_json(path)
    data = json.loads(path.read_text())
    assert set(data) == {"theta", "rows"}
    assert all(t in (-1, 1) for t in data["theta"])
    assert [r["k"] for r in data["rows"]] == [1, 2, 3, 4]
    assert all(r["pass"] == (r["lhs"] >= r["target"]) for r in data["rows"])


def test_dyadic_bound_flat_coefficients():
    n, beta = 64, 0.0
    inst = LemmaInstance(beta, 1.0, n, euclid)
    res = dyadic_bound(inst, np.ones(n))
    K = dyadic_level(n, beta)
    assert K == 2
    # after normalization every |a_j| = 1 = 2^-3 sqrt(64), below both bands: all residual
    assert res.groups == [[], []] and len(res.residual) == n
    assert res.bound == pytest.approx(8 * (2 ** (K + 2) + 2 ** -K * 8))
    assert res.bound <= math.sqrt(n) * (8 + n ** 0.5 / 2 ** K) * 2


def test_dyadic_bound_flat_small_n_lands_in_first_band():
    inst = LemmaInstance(0.0, 1.0, 4, euclid)
    res = dyadic_bound(inst, np.ones(4))
    assert res.K == 1
    assert res.groups == [[0, 1, 2, 3]] and res.residual == []
    assert res.bound == pytest.approx(2 * (8 + 2 / 2))


def test_dyadic_bound_euclidean_oracle():
    n = 16
    inst = LemmaInstance(0.0, 1.0, n, euclid)
    assert inst.check_probes()
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = rng.standard_normal(n) * rng.uniform(0.1, 10)
        res = dyadic_bound(inst, a)
        assert euclid(a) <= res.bound
        assert res.group_sizes_ok
        assert res.bound <= inst.c12() * n ** 0.25 * euclid(a) * (1 + 1e-12)
        covered = sorted(sum(res.groups, []) + res.residual + res.peeled)
        assert covered == list(range(n))


def test_dyadic_bound_spike_is_peeled():
    n = 25
    inst = LemmaInstance(0.1, 1.0, n, euclid)
    a = np.zeros(n)
    a[3] = -7.0
    res = dyadic_bound(inst, a)
    assert res.peeled == [3]
    assert res.bound >= 7.0


def test_dyadic_bound_against_sharpness_seminorm():
    rng = np.random.default_rng(6)
    for beta in (0.0, 0.2, 0.4):
        n = 144
        norm = lambda v, b=beta, n=n: sharpness_seminorm(b, n, v)
        inst = LemmaInstance(beta, 1.0, n, norm)
        assert inst.check_probes()
        for _ in range(30):
            a = rng.standard_normal(n) ** 3
            assert norm(a) <= dyadic_bound(inst, a).bound


def test_probe_check_rejects_bad_seminorm():
    inst = LemmaInstance(0.0, 1.0, 8, lambda v: float(np.sum(np.abs(v))))
    assert not inst.check_probes()
    with pytest.raises(ValueError):
        LemmaInstance(0.5, 1.0, 8, euclid)


def test_sharpness_examples():
    for beta, n in [(0.0, 100), (0.1, 256), (0.25, 4096)]:
        L = int(math.floor(n ** (0.5 + beta) + 1e-9))
        assert sharpness_seminorm(beta, n, np.ones(n)) == max(L, 1)
        assert sharpness_seminorm(beta, n, np.ones(n)) <= n ** (0.5 + beta) + 1e-9
        for k in (0, n - 1):
            e = np.zeros(n)
            e[k] = 1
            assert sharpness_seminorm(beta, n, e) == 1
    a, ratio = sharpness_witness(0.0, 100)
    assert sharpness_seminorm(0.0, 100, a) == 10
    assert math.sqrt(np.sum(a * a)) * 100 ** 0.25 == pytest.approx(10)
    assert ratio == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sharpness_seminorm(0.5, 10, np.ones(10))
