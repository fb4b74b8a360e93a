import math

import numpy as np
import pytest

from iunorm.norm_core import m_norm_of_values
from iunorm.random_ensemble import (EnsembleSpec, FunctionSystem, corollary2_rhs, expected_m_norm,
                                    r_statistic, random_poly_net, realization_norms, salem_zygmund_ratio,
                                    sample_xi, sandwich, theorem1_rhs, theorem2_rhs)

RADEMACHER = EnsembleSpec("rademacher")
GAUSSIAN = EnsembleSpec("gaussian")


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec("cauchy")
    with pytest.raises(ValueError):
        EnsembleSpec("gaussian", moment_bound=1.06)
    assert EnsembleSpec("gaussian", moment_bound=1.17).xi_kind == "gaussian"
    assert EnsembleSpec("rademacher", moment_bound=1.0)


def test_rademacher_moments_and_determinism():
    n = 100_000
    xi = sample_xi(RADEMACHER, n, seed=1)
    assert set(np.unique(xi)) == {-1.0, 1.0}
    assert abs(xi.mean()) <= 4 / math.sqrt(n)
    assert abs(np.mean(xi ** 2) - 1) <= 4 * math.sqrt(2) / math.sqrt(n)
    np.testing.assert_array_equal(xi, sample_xi(RADEMACHER, n, seed=1))


def test_gaussian_moments():
    n = 200_000
    xi = sample_xi(GAUSSIAN, n, seed=2)
    assert abs(xi.mean()) <= 4 / math.sqrt(n)
    assert abs(np.mean(xi ** 2) - 1) <= 4 * math.sqrt(2) / math.sqrt(n)
    assert abs(np.mean(np.abs(xi) ** 3) - 2 * math.sqrt(2 / math.pi)) < 0.03


def test_r_statistic():
    assert r_statistic(np.ones(37)) == pytest.approx(37)
    assert r_statistic([1, 0, 0, 0]) == 1
    assert r_statistic([2, 1, 1]) == pytest.approx(36 / 18)
    assert r_statistic([1e-200, 1e-200]) == pytest.approx(2)
    with pytest.raises(ValueError):
        r_statistic(np.zeros(3))
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.standard_normal(int(rng.integers(1, 50)))
        assert 1 - 1e-12 <= r_statistic(a) <= a.size + 1e-9


def test_cosine_system_condition_a():
    for n in (1, 8, 64):
        fs = FunctionSystem.cosine(n)
        np.testing.assert_allclose(fs.l2_norms, 1.0, atol=1e-12)
        assert fs.satisfies_condition_a(M=2.0)
        # sqrt2 * ||cos||_3 = (2^{3/2} * 4/(3 pi))^{1/3}
        assert fs.l3_bound == pytest.approx((2 ** 1.5 * 4 / (3 * math.pi)) ** (1 / 3), rel=0.02)


def test_random_poly_net_examples():
    fs = FunctionSystem.cosine(4)
    e1 = np.array([2.5, 0, 0, 0])
    v = random_poly_net(RADEMACHER, e1, fs, seed=0)
    xi = sample_xi(RADEMACHER, 4, seed=0)
    np.testing.assert_allclose(v.samples, 2.5 * xi[0] * fs.values[0])
    assert np.all(random_poly_net(RADEMACHER, np.zeros(4), fs, seed=3).samples == 0)
    fs2 = FunctionSystem.cosine(2)
    v = random_poly_net(RADEMACHER, np.ones(2), fs2, seed=9)
    xi = sample_xi(RADEMACHER, 2, seed=9)
    t = 2 * math.pi * np.arange(16) / 16
    np.testing.assert_allclose(v.samples, math.sqrt(2) * (xi[0] * np.cos(t) + xi[1] * np.cos(2 * t)), atol=1e-14)
    with pytest.raises(ValueError):
        random_poly_net(RADEMACHER, np.ones(3), fs2, seed=0)


def test_expected_m_norm_constant_row():
    fs = FunctionSystem(np.ones((1, 10)))
    est = expected_m_norm(RADEMACHER, np.array([1.0]), fs, m=5, trials=20, seed=0)
    assert est.mean == 1.0 and est.std_error == 0.0


def test_expected_m_norm_m1_is_l1_average():
    fs = FunctionSystem.cosine(16)
    a = np.ones(16)
    est = expected_m_norm(RADEMACHER, a, fs, 1, trials=400, seed=5)
    # independent route: plain mean of |F| over the net, same trial seeds
    direct = np.mean([np.mean(np.abs(fs.combine(a * RADEMACHER.draw(np.random.default_rng([5, t]), 16))))
                      for t in range(400)])
    assert abs(est.mean - direct) <= 1e-12
    ref = expected_m_norm(RADEMACHER, a, fs, 1, trials=400, seed=6)
    assert abs(est.mean - ref.mean) <= 4 * math.hypot(est.std_error, ref.std_error)


def test_expected_m_norm_seed_consistency():
    fs = FunctionSystem.cosine(64)
    a = np.ones(64)
    e1 = expected_m_norm(RADEMACHER, a, fs, 16, trials=200, seed=1)
    e2 = expected_m_norm(RADEMACHER, a, fs, 16, trials=200, seed=2)
    assert abs(e1.mean - e2.mean) <= 4 * math.hypot(e1.std_error, e2.std_error)
    assert e1 == expected_m_norm(RADEMACHER, a, fs, 16, trials=200, seed=1, threads=3)


def test_monotone_in_m():
    fs = FunctionSystem.cosine(32)
    norms = realization_norms(GAUSSIAN, np.ones(32), fs, [1, 2, 4, 8, 16, 64], trials=50, seed=4)
    assert np.all(np.diff(norms, axis=1) >= -1e-12)


def test_theorem1_rhs():
    assert theorem1_rhs(np.ones(100), 10) == pytest.approx(10 * math.sqrt(math.log(11)))
    assert theorem1_rhs(np.ones(100), 10) == pytest.approx(15.4851, abs=1e-4)
    a = np.array([3.0, 1, 1, 1])
    assert theorem1_rhs(a, 1) == pytest.approx(math.sqrt(np.sum(a * a) * math.log(2)))
    for m in (1, 5, 1000):
        assert theorem1_rhs(np.array([-2.0, 0, 0]), m) == pytest.approx(math.sqrt(math.log(2)) * 2)


def test_theorem2_rhs():
    fs = FunctionSystem(np.ones((1, 7)))
    assert theorem2_rhs(fs, np.array([1.0]), 1) == pytest.approx(1.0)
    n = 16
    fs = FunctionSystem.cosine(n)
    for m in (1, 4, 50):
        assert corollary2_rhs(fs, np.ones(n), m) == pytest.approx(math.sqrt(2) * math.sqrt(n) * math.sqrt(1 + math.log(m)))
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.standard_normal(n)
        for m in (1, 3, 40):
            assert theorem2_rhs(fs, a, m) <= corollary2_rhs(fs, a, m) + 1e-12


def test_theorem2_rhs_uses_square_function():
    fs = FunctionSystem.cosine(8)
    a = np.linspace(1, 2, 8)
    g = np.sqrt((a * a) @ fs.values ** 2)
    assert theorem2_rhs(fs, a, 5) == pytest.approx(m_norm_of_values(g, 5) * math.sqrt(1 + math.log(5)))


def test_small_r_coefficients_give_smaller_norms():
    n = 64
    fs = FunctionSystem.cosine(n)
    flat = np.ones(n)
    spiky = 2.0 ** -np.arange(1, n + 1)
    spiky *= math.sqrt(n) / np.linalg.norm(spiky)
    assert r_statistic(spiky) < 4
    m = 64
    a = expected_m_norm(RADEMACHER, flat, fs, m, 200, seed=3)
    b = expected_m_norm(RADEMACHER, spiky, fs, m, 200, seed=3)
    assert b.mean < a.mean
    assert theorem1_rhs(spiky, m) == pytest.approx(math.sqrt(n * math.log(r_statistic(spiky) + 1)))


def test_sandwich_small_grid():
    n = 64
    reps = sandwich(RADEMACHER, np.ones(n), FunctionSystem.cosine(n), [4, 16], trials=50, seed=0)
    for r in reps:
        assert r.P == min(r.m, n) + 1
        assert r.ratio_low > 0 and r.ratio_high <= 1
        assert r.ratio_low == r.lhs.mean / r.rhs_low


def test_salem_zygmund():
    for n in (2, 10, 100):
        est = salem_zygmund_ratio(n, 3, seed=0, diagnostic=True)
        assert est.mean == pytest.approx((2 * n + 1) / math.sqrt(n * math.log(n)), rel=1e-12)
        assert est.std_error == 0
    a = salem_zygmund_ratio(64, 20, seed=5)
    assert a == salem_zygmund_ratio(64, 20, seed=5, threads=4)
    with pytest.raises(ValueError):
        salem_zygmund_ratio(1, 10, seed=0)
