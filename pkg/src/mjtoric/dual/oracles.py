"""Closed-form solutions used to validate the flow.

In one dimension the equation (with ``b = 0``) says that the map
``y -> grad h_alpha^*(grad h(y))`` pushes ``(c + A_c) dy`` on ``P_beta`` to
Lebesgue measure on ``P_alpha``.  With ``z = y - y_left`` and
``A_c = a (z - L/2)`` the transport is ``s(z) = z q(z)`` with

    q(z) = c + a (z - L)/2,    L_alpha - s(z) = (L - z) r(z),  r(z) = c + a z/2,

so ``u = h - h_can`` has ``u' = 1/2 log(q/r)``, which integrates in closed form.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import EndpointMismatch, InfeasibleTransport, NotSeparable
from .problem import ProblemSpec

ENDPOINT_TOL = 1e-12


def _int_log(w0: float, beta: float, dz):
    """``int_0^dz log(w0 + beta t) dt`` without cancellation for small ``beta``."""
    dz = np.asarray(dz, dtype=float)
    x = beta * dz / w0
    w = w0 + beta * dz
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.abs(x) > 1e-8, np.log1p(x) / np.where(x == 0, 1, x), 1 - x / 2 + x * x / 3)
    return dz * (np.log(w) - 1 + ratio)


def _interval(P):
    # returns (left, right) of a 1D polytope with facets +-1
    lo = hi = None
    for f in P.facets:
        if f.normal == (1,):
            lo = -f.offset
        elif f.normal == (-1,):
            hi = f.offset
    if lo is None or hi is None or len(P.facets) != 2:
        raise ValueError("expected an interval with normals (1) and (-1)")
    return Fraction(lo), Fraction(hi)


@dataclass(frozen=True)
class TransportSolution1D:
    """Exact ``h`` on ``[left, left + L]`` (as floats)."""

    left: float
    L: float
    L_alpha: float
    c: float
    a: float

    def z(self, y):
        return np.asarray(y, dtype=float) - self.left

    def s(self, y):
        z = self.z(y)
        return z * (self.c + self.a * (z - self.L) / 2)

    def rhs(self, y):
        return self.c + self.a * (self.z(y) - self.L / 2)

    def u(self, y):
        z, L, c, a = self.z(y), self.L, self.c, self.a
        q0, r0 = c - a * L / 2, c
        mid = L / 2
        # int_mid^z of 1/2 (log q - log r)
        Fq = _int_log(q0, a / 2, z) - _int_log(q0, a / 2, mid)
        Fr = _int_log(r0, a / 2, z) - _int_log(r0, a / 2, mid)
        return 0.5 * (Fq - Fr)

    def h_can(self, y):
        z = self.z(y)
        return 0.5 * (z * np.log(z) + (self.L - z) * np.log(self.L - z))

    def h(self, y):
        return self.h_can(y) + self.u(y)

    def dh(self, y):
        s = self.s(y)
        return 0.5 * (np.log(s) - np.log(self.L_alpha - s))

    def d2h(self, y):
        s = self.s(y)
        return 0.5 * (1 / s + 1 / (self.L_alpha - s)) * self.rhs(y)

    def h_at(self, points):
        """``h`` at grid points of shape ``(..., 1)``."""
        return self.h(np.asarray(points)[..., 0])


def solve_1d_transport(problem: ProblemSpec) -> TransportSolution1D:
    if problem.n != 1:
        raise ValueError("the transport oracle is one-dimensional")
    if problem.b != 0:
        raise ValueError("the transport oracle needs b = 0")
    yl, yr = _interval(problem.pair.P_beta)
    xl, xr = _interval(problem.pair.P_alpha)
    L, La = yr - yl, xr - xl
    if problem.min_rhs <= 0:
        raise InfeasibleTransport(f"c + min A_c = {problem.min_rhs} is not positive")
    mismatch = problem.c * L - La
    if abs(mismatch) > ENDPOINT_TOL:
        raise EndpointMismatch(f"s(L_beta) - L_alpha = {mismatch}")
    a = problem.ham.a_v[0]
    return TransportSolution1D(float(yl), float(L), float(La), float(problem.c), float(a))


@dataclass(frozen=True)
class ProductSolution:
    first: TransportSolution1D
    second: TransportSolution1D

    def h(self, y):
        y = np.asarray(y, dtype=float)
        return self.first.h(y[..., 0]) + self.second.h(y[..., 1])

    def u(self, y):
        y = np.asarray(y, dtype=float)
        return self.first.u(y[..., 0]) + self.second.u(y[..., 1])

    h_at = h


def _box(P):
    sides = []
    for k in range(2):
        e = tuple(int(i == k) for i in range(2))
        m = tuple(-x for x in e)
        lo = [f.offset for f in P.facets if f.normal == e]
        hi = [f.offset for f in P.facets if f.normal == m]
        if len(lo) != 1 or len(hi) != 1:
            raise NotSeparable("polytope is not an axis-aligned rectangle")
        sides.append((-lo[0], hi[0]))
    if len(P.facets) != 4:
        raise NotSeparable("polytope is not an axis-aligned rectangle")
    return sides


def product_oracle(problem: ProblemSpec) -> ProductSolution:
    """Separable solution on a rectangle with ``a_v`` supported on the first factor."""
    if problem.n != 2:
        raise ValueError("the product oracle is two-dimensional")
    if problem.ham.a_v[1] != 0:
        raise NotSeparable("a_v must vanish on the second factor")
    if problem.b != 0:
        raise ValueError("the product oracle needs b = 0")
    (b1, b2) = _box(problem.pair.P_beta)
    (a1, a2) = _box(problem.pair.P_alpha)
    Lb = [hi - lo for lo, hi in (b1, b2)]
    La = [hi - lo for lo, hi in (a1, a2)]
    c2 = La[1] / Lb[1]
    c1 = problem.c - c2
    if c1 * Lb[0] != La[0]:
        raise EndpointMismatch(f"first factor endpoint mismatch: {c1 * Lb[0]} != {La[0]}")
    a = problem.ham.a_v[0]
    if c1 - abs(a) * Lb[0] / 2 <= 0:
        raise InfeasibleTransport("c_1 + min A_c is not positive on the first factor")
    first = TransportSolution1D(float(b1[0]), float(Lb[0]), float(La[0]), float(c1), float(a))
    second = TransportSolution1D(float(b2[0]), float(Lb[1]), float(La[1]), float(c2), 0.0)
    return ProductSolution(first, second)
