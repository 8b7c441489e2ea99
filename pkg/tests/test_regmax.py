import numpy as np
import pytest

from mjtoric.errors import DimensionTooLarge
from mjtoric.regmax import DEFAULT_KERNEL, RegMaxKernel, reg_max, reg_max_grad
from oracles import reg_max_dblquad


def test_kernel_moments():
    m0, m1 = DEFAULT_KERNEL.moments()
    assert abs(m0 - 1) < 1e-12 and abs(m1) < 1e-12
    assert DEFAULT_KERNEL.theta(np.array([-1.0, 1.0, 1.5])).tolist() == [0, 0, 0]
    assert DEFAULT_KERNEL.cdf(np.array([-1.0, 0.0, 1.0])) == pytest.approx([0, 0.5, 1], abs=1e-13)


def test_examples():
    for t in (-2.5, 0.0, 3.25):
        assert reg_max([t], [0.7]) == pytest.approx(t, abs=1e-12)
    v = reg_max([0, 0], [1, 1])
    assert 0 <= v <= 1
    assert reg_max([0, -5], [1, 1]) == pytest.approx(0, abs=1e-12)
    assert reg_max_grad([0, 0], [1, 1]) == pytest.approx([0.5, 0.5], abs=1e-8)
    assert reg_max_grad([0, -5], [1, 1]) == pytest.approx([1, 0], abs=1e-8)


@pytest.mark.parametrize("t,eta", [((0.0, 0.0), (1.0, 1.0)), ((0.3, -0.2), (0.5, 0.8)), ((1.0, 0.1), (0.4, 1.3))])
def test_against_double_integral(t, eta):
    ref = reg_max_dblquad(t, eta, DEFAULT_KERNEL.theta)
    assert reg_max(t, eta) == pytest.approx(ref, abs=1e-9)


def test_gradient_matches_differences():
    rng = np.random.default_rng(7)
    for _ in range(30):
        N = rng.integers(1, 4)
        t, eta = rng.normal(size=N), rng.uniform(0.2, 2, size=N)
        g = reg_max_grad(t, eta)
        step = 1e-6
        fd = [(reg_max(t + step * e, eta) - reg_max(t - step * e, eta)) / (2 * step) for e in np.eye(N)]
        assert g == pytest.approx(fd, abs=1e-6)
        assert abs(g.sum() - 1) < 1e-8 and g.min() >= -1e-10


def test_properties_random():
    rng = np.random.default_rng(8)
    for _ in range(500):
        N = rng.integers(1, 4)
        t, eta = rng.normal(scale=2, size=N), rng.uniform(0.1, 2, size=N)
        m = reg_max(t, eta)
        assert t.max() - 1e-10 <= m <= (t + eta).max() + 1e-10
        a = rng.normal()
        assert reg_max(t + a, eta) == pytest.approx(m + a, abs=1e-8)
        assert reg_max_grad(t + a, eta) == pytest.approx(reg_max_grad(t, eta), abs=1e-8)
        assert reg_max(t + rng.uniform(0, 1, size=N), eta) >= m - 1e-10
        s = rng.normal(scale=2, size=N)
        assert reg_max((t + s) / 2, eta) <= (m + reg_max(s, eta)) / 2 + 1e-8


def test_dropping_a_separated_argument():
    t, eta = np.array([0.2, 0.5, -4.0]), np.array([0.5, 0.5, 0.3])
    assert reg_max(t, eta) == pytest.approx(reg_max(t[:2], eta[:2]), abs=1e-12)


def test_errors():
    with pytest.raises(DimensionTooLarge):
        reg_max(np.zeros(4), np.ones(4))
    assert RegMaxKernel(max_dim=4).max_dim == 4
    with pytest.raises(ValueError):
        reg_max([0, 0], [1, 0])
