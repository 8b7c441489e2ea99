import numpy as np
import pytest
import sympy as sp

from mjtoric.errors import (HypothesisViolated, NonPositiveEigenvalue, NotDiagonal, NotHermitian,
                            NotPositiveDefinite, SandwichViolated)
from mjtoric.matrix_ops import (F_b, MetricPair, P_op, Q_op, Spectrum, change_of_omega_gap,
                                eps_thresholds, f_b, f_b_divided, f_b_grad, f_to_p_check, grad_F,
                                hessian_form, path_guard, restricted_Q, strong_convexity_form)
from oracles import F_b_symbolic_second_variation


def rand_spd(rng, n, cplx=True):
    X = rng.normal(size=(n, n)) + (1j * rng.normal(size=(n, n)) if cplx else 0)
    return X @ X.conj().T + 0.5 * np.eye(n)


def rand_herm(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


def test_f_b_examples():
    assert f_b([1, 1], 0) == 2
    assert f_b([1, 2, 4], 8) == pytest.approx(2.75, abs=1e-15)
    assert f_b([2, 2], -1) == pytest.approx(0.75, abs=1e-15)
    assert f_b([4, 1, 2], 8) == f_b([1, 2, 4], 8)
    with pytest.raises(NonPositiveEigenvalue):
        f_b([1, 0], 0)
    with pytest.raises(HypothesisViolated):
        Spectrum(np.array([1.0, 1.0]), K=2)


def test_operators_examples():
    for n in (1, 2, 3):
        I = np.eye(n)
        assert F_b((I, I), 0.5) == pytest.approx(n + 0.5)
        assert Q_op((I, I)) == pytest.approx(n) and P_op((I, I)) == pytest.approx(n - 1)
    pair = MetricPair(np.eye(3), np.diag([1.0, 2.0, 4.0]))
    assert Q_op(pair) == pytest.approx(1.75, abs=1e-14)
    assert P_op(pair) == pytest.approx(1.5, abs=1e-14)


def test_congruence_invariance():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = rng.integers(1, 5)
        g, h = rand_spd(rng, n), rand_spd(rng, n)
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        g2, h2 = M.conj().T @ g @ M, M.conj().T @ h @ M
        for op in (lambda p: F_b(p, 0.7), Q_op, P_op):
            a, b = op((g, h)), op((g2, h2))
            assert abs(a - b) <= 1e-10 * max(1, abs(a))


def test_pair_validation():
    with pytest.raises(NotPositiveDefinite):
        MetricPair(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(NotHermitian):
        MetricPair(np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_gradient_diagonal_and_finite_differences():
    lam = np.array([0.5, 1.5, 3.0])
    G = grad_F((np.eye(3), np.diag(lam)), 0.0)
    assert np.allclose(np.diag(G), -1 / lam**2, atol=1e-14)
    rng = np.random.default_rng(2)
    step = 1e-5
    for _ in range(40):
        n = rng.integers(1, 5)
        g, h, H = rand_spd(rng, n), rand_spd(rng, n), rand_herm(rng, n)
        b = rng.uniform(-0.2, 3)
        fd = (F_b((g, h + step * H), b) - F_b((g, h - step * H), b)) / (2 * step)
        an = float(np.real(np.trace(grad_F((g, h), b) @ H)))
        assert abs(fd - an) <= 1e-6 * (1 + abs(an))


def test_hessian_form_against_second_differences():
    rng = np.random.default_rng(3)
    step = 1e-4
    for _ in range(40):
        n = rng.integers(1, 5)
        g, h, B = rand_spd(rng, n), rand_spd(rng, n), rand_herm(rng, n)
        b = rng.uniform(0, 3)
        fd = (F_b((g, h + step * B), b) - 2 * F_b((g, h), b) + F_b((g, h - step * B), b)) / step**2
        an = hessian_form((g, h), B, b)
        assert abs(fd - an) <= 1e-6 * (1 + abs(an)) * 1e2  # second differences lose ~4 digits
        assert an >= -1e-10


def test_hessian_form_symbolic():
    for lams, B, b in (((1, 2), [[0, 1], [1, 0]], 5), ((2, 3, 5), [[1, 2, 0], [2, -1, 1], [0, 1, 3]], 1)):
        exact = float(F_b_symbolic_second_variation(lams, B, b))
        got = hessian_form((np.eye(len(lams)), np.diag(lams)), np.array(B, float), b)
        assert got == pytest.approx(exact, rel=1e-12)


def test_repeated_eigenvalues_no_nan():
    D = f_b_divided([2.0, 2.0, 2.0], 1.5)
    assert np.all(np.isfinite(D))
    # the limit of (d_i f - d_j f)/(lam_i - lam_j) as lam_j -> lam_i
    lam = np.array([2.0, 2.0 + 1e-6])
    num = (f_b_grad(lam, 1.5)[0] - f_b_grad(lam, 1.5)[1]) / (lam[0] - lam[1])
    assert f_b_divided([2.0, 2.0], 1.5)[0, 1] == pytest.approx(num, rel=1e-5)
    val = hessian_form((np.eye(3), 2 * np.eye(3)), rand_herm(np.random.default_rng(0), 3), 1.0)
    assert np.isfinite(val)


def test_strong_convexity_form():
    assert strong_convexity_form(np.diag([1.0, 2.0]), np.zeros((2, 2)), 3.0) == 0
    # symbolic oracle at b = 5, A = diag(1, 2), B = offdiag(1)
    l1, l2 = sp.Integer(1), sp.Integer(2)
    b = 5
    second = F_b_symbolic_second_variation((1, 2), [[0, 1], [1, 0]], b)
    df = [-1 / l1**2 - b / (l1 * l1 * l2), -1 / l2**2 - b / (l2 * l1 * l2)]
    extra = df[0] / l2 + df[1] / l1
    exact = float(second + extra)
    got = strong_convexity_form(np.diag([1.0, 2.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), b)
    assert got == pytest.approx(exact, rel=1e-12) and got >= 0
    rng = np.random.default_rng(4)
    for _ in range(1000):
        n = rng.integers(1, 5)
        lam = rng.uniform(0.1, 5, size=n)
        assert strong_convexity_form(np.diag(lam), rand_herm(rng, n), 0.0) >= -1e-10
    with pytest.raises(NotDiagonal):
        strong_convexity_form(np.array([[1.0, 0.1], [0.1, 1.0]]), np.eye(2), 0.0)
    with pytest.raises(NotHermitian):
        strong_convexity_form(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0)


def test_eps_thresholds_examples():
    t = eps_thresholds(1, 2, 1)
    assert t.eps3 == 0.125 and t.eps1 == pytest.approx(2 / 3) and t.eps4 == 1
    assert eps_thresholds(2, 3).eps4 == 0.25
    with pytest.raises(ValueError):
        eps_thresholds(0, 2)


def test_path_guard():
    for n in (1, 2, 3):
        res = path_guard([np.ones(n)] * 5, K=n + 1, C_theta=0.7, eps=0.0)
        assert res.holds and res.max_F0 == pytest.approx(n)
    with pytest.raises(HypothesisViolated) as exc:
        path_guard([np.ones(2), np.full(2, 0.1)], K=3, C_theta=0.1, eps=0.0)
    assert exc.value.which == "path"
    with pytest.raises(HypothesisViolated):
        path_guard([np.ones(2)], K=1, C_theta=1, eps=0.0)


def test_change_of_omega():
    I = np.eye(2)
    assert change_of_omega_gap(I, I, I, 0.0, 0.0).gap == 0
    res = change_of_omega_gap(I, 1.1 * I, I, 0.0, 0.1)
    # F_0 w.r.t. g2 = 1.1 I is 2 * 1.1, so the gap is 0.2
    assert res.gap == pytest.approx(0.2, abs=1e-12) and res.holds
    with pytest.raises(SandwichViolated):
        change_of_omega_gap(I, 1.5 * I, I, 0.0, 0.1)


def test_f_to_p():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = rng.integers(1, 4)
        g, h = rand_spd(rng, n), rand_spd(rng, n)
        K = Q_op((g, h)) * 1.01
        assert f_to_p_check((g, h), 0.0, K).holds
        assert f_to_p_check((g, h), 0.9 * eps_thresholds(K, n).eps4, K).holds
    # Q sits exactly at the cap: h = 2 g, Q = 1 = K
    res = f_to_p_check((np.eye(2), 2 * np.eye(2)), 0.25, 1.0)
    assert res.holds and res.F - res.P == pytest.approx(1 / 2 - 0.25 / 4, abs=1e-15)
    with pytest.raises(HypothesisViolated):
        f_to_p_check((np.eye(2), np.eye(2)), 0.0, 1.0)


def test_restriction_dominated():
    rng = np.random.default_rng(6)
    for _ in range(200):
        n = rng.integers(2, 5)
        g, h = rand_spd(rng, n), rand_spd(rng, n)
        k = rng.integers(1, n)
        S = np.eye(n)[:, sorted(rng.choice(n, size=k, replace=False))]
        assert restricted_Q((g, h), S) <= Q_op((g, h)) + 1e-10
