"""Regularized maximum.

``M_eta(t) = E[max_j (t_j + eta_j tau_j)]`` for independent ``tau_j`` with a
smooth even bump density on ``[-1, 1]``.  Instead of an N-dimensional tensor
quadrature of a non-smooth integrand we integrate the distribution function
of the maximum,

    M = b - int_a^b prod_j F((z - t_j) / eta_j) dz,

with ``a = max(t_j - eta_j)`` and ``b = max(t_j + eta_j)``.  The integrand is
smooth between the breakpoints ``t_j +- eta_j``, so composite Gauss-Legendre
is accurate to near machine precision.  The gradient comes from
differentiating under the integral: ``dM/dt_j = P(j attains the max)``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicHermiteSpline

from .errors import DimensionTooLarge


def _bump(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    inside = np.abs(h) < 1
    out[inside] = np.exp(-1.0 / (1.0 - h[inside] ** 2))
    return out


@dataclass(frozen=True)
class RegMaxKernel:
    nodes: int = 64
    max_dim: int = 3
    table_size: int = 4001
    _gl: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_gl", leggauss(self.nodes))

    def _quad(self, f, a: float, b: float, pieces: int = 8) -> float:
        x, w = self._gl
        edges = np.linspace(a, b, pieces + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            total += half * np.dot(w, f(mid + half * x))
        return total

    @cached_property
    def _norm(self) -> float:
        return 2.0 * self._quad(_bump, 0.0, 1.0)

    def theta(self, h) -> np.ndarray:
        return _bump(h) / self._norm

    @cached_property
    def _cdf_spline(self) -> CubicHermiteSpline:
        # F on [0, 1] with F(0) = 1/2; cumulative integrals per table cell
        grid = np.linspace(0.0, 1.0, self.table_size)
        x, w = leggauss(16)
        lo, hi = grid[:-1], grid[1:]
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        cells = half * (self.theta(mid[:, None] + half[:, None] * x[None, :]) @ w)
        F = 0.5 + np.concatenate([[0.0], np.cumsum(cells)])
        return CubicHermiteSpline(grid, F, self.theta(grid))

    def cdf(self, h) -> np.ndarray:
        h = np.clip(np.asarray(h, dtype=float), -1.0, 1.0)
        right = self._cdf_spline(np.abs(h))
        return np.where(h >= 0, right, 1.0 - right)

    def moments(self):
        """Quadrature of ``theta`` and ``h theta`` over ``[-1, 1]``."""
        m0 = self._quad(self.theta, -1.0, 1.0)
        m1 = self._quad(lambda h: h * self.theta(h), -1.0, 1.0)
        return m0, m1


DEFAULT_KERNEL = RegMaxKernel()


def _prepare(t, eta, kernel: RegMaxKernel):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if t.shape != eta.shape or t.ndim != 1:
        raise ValueError("t and eta must be vectors of equal length")
    if t.size > kernel.max_dim:
        raise DimensionTooLarge(f"N = {t.size} exceeds the supported maximum {kernel.max_dim}")
    if not np.all(eta > 0):
        raise ValueError("eta must be positive")
    a, b = np.max(t - eta), np.max(t + eta)
    br = np.concatenate([t - eta, t + eta])
    br = np.unique(np.clip(br, a, b))
    # z nodes and weights over the breakpoint partition
    x, w = kernel._gl
    lo, hi = br[:-1], br[1:]
    keep = hi - lo > 0
    lo, hi = lo[keep], hi[keep]
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    z = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wz = (half[:, None] * w[None, :]).ravel()
    tau = (z[None, :] - t[:, None]) / eta[:, None]
    return t, eta, a, b, z, wz, tau


def reg_max(t, eta, kernel: RegMaxKernel = DEFAULT_KERNEL) -> float:
    t, eta, a, b, z, wz, tau = _prepare(t, eta, kernel)
    if z.size == 0:
        return float(b)
    G = np.prod(kernel.cdf(tau), axis=0)
    return float(b - wz @ G)


def reg_max_grad(t, eta, kernel: RegMaxKernel = DEFAULT_KERNEL) -> np.ndarray:
    t, eta, a, b, z, wz, tau = _prepare(t, eta, kernel)
    if z.size == 0:
        return np.ones(1)
    F = kernel.cdf(tau)
    dens = kernel.theta(tau) / eta[:, None]
    out = np.empty(t.size)
    for j in range(t.size):
        others = np.prod(np.delete(F, j, axis=0), axis=0)
        out[j] = wz @ (dens[j] * others)
    return out
