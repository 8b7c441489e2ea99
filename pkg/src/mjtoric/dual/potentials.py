"""Symplectic potentials on polytopes and their numerical Legendre duals."""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from ..errors import BoundaryOrExterior, NewtonDiverged
from ..toric_core import DelzantPolytope


class PotentialValue(NamedTuple):
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


class GuilleminPotential:
    """``h(y) = 1/2 sum_i l_i(y) log l_i(y)`` with ``l_i(y) = <u_i, y> + lam_i``.

    Methods accept a single point of shape ``(n,)`` or a batch ``(..., n)``.
    """

    def __init__(self, normals, offsets):
        self.U = np.asarray(normals, dtype=float)
        self.lam = np.asarray([float(x) for x in offsets])
        self.n = self.U.shape[1]

    @classmethod
    def of(cls, polytope: DelzantPolytope) -> "GuilleminPotential":
        polytope.require_valid()
        return cls(polytope.normals, polytope.offsets)

    def ell(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.U.T + self.lam

    def feasible(self, y) -> np.ndarray:
        return np.all(self.ell(y) > 0, axis=-1)

    def _ell_checked(self, y):
        ell = self.ell(y)
        if not np.all(ell > 0):
            raise BoundaryOrExterior("point is on the boundary of or outside the polytope")
        return ell

    def value(self, y):
        ell = self._ell_checked(y)
        return 0.5 * np.sum(ell * np.log(ell), axis=-1)

    def grad(self, y):
        ell = self._ell_checked(y)
        return 0.5 * (np.log(ell) + 1.0) @ self.U

    def hess(self, y):
        ell = self._ell_checked(y)
        return 0.5 * np.einsum("...k,ki,kj->...ij", 1.0 / ell, self.U, self.U)


class QuadraticPotential:
    """``h(y) = 1/2 y^T S y`` on all of R^n."""

    def __init__(self, S):
        self.S = np.atleast_2d(np.asarray(S, dtype=float))
        self.n = self.S.shape[0]

    def feasible(self, y):
        return np.ones(np.shape(y)[:-1], dtype=bool)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", y, self.S, y)

    def grad(self, y):
        return np.asarray(y, dtype=float) @ self.S

    def hess(self, y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(self.S, y.shape[:-1] + self.S.shape).copy()


def guillemin_eval(P: DelzantPolytope, y) -> PotentialValue:
    pot = GuilleminPotential.of(P)
    y = np.asarray([float(Fraction(v)) if isinstance(v, str) else float(v) for v in y])
    return PotentialValue(float(pot.value(y)), pot.grad(y), pot.hess(y))


@dataclass
class LegendreEvaluator:
    potential: object
    tol: float = 1e-12
    max_iter: int = 50
    start: Optional[np.ndarray] = None


def _newton_dual(pot, x, y, tol, max_iter):
    """Minimize ``psi(y) = h(y) - <x, y>`` by damped Newton with feasibility backtracking."""
    for _ in range(max_iter):
        G = pot.grad(y) - x
        if np.max(np.abs(G)) <= tol:
            return y
        H = pot.hess(y)
        step = np.linalg.solve(H, G)
        t = 1.0
        psi0 = pot.value(y) - x @ y
        while True:
            cand = y - t * step
            if pot.feasible(cand):
                # Armijo only matters far from the solution
                if t * np.max(np.abs(step)) < 1e-3 or pot.value(cand) - x @ cand <= psi0 - 1e-4 * t * (G @ step):
                    break
            t *= 0.5
            if t < 1e-30:
                raise NewtonDiverged(f"line search failed for x = {x}", location=tuple(y))
        y = cand
    if np.max(np.abs(pot.grad(y) - x)) <= tol * 10:
        return y
    raise NewtonDiverged(f"Newton did not converge for x = {x}", location=tuple(y))


def legendre_eval(ev: LegendreEvaluator, x) -> PotentialValue:
    """``f(x) = sup_y <x, y> - h(y)`` with ``grad f = y*`` and ``D^2 f = (D^2 h(y*))^{-1}``."""
    pot = ev.potential
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if ev.start is not None:
        y = np.array(ev.start, dtype=float)
    elif isinstance(pot, GuilleminPotential):
        y = _interior_point(pot)
    else:
        y = np.zeros(pot.n)
    y = _newton_dual(pot, x, y, ev.tol, ev.max_iter)
    val = float(x @ y - pot.value(y))
    return PotentialValue(val, y, np.linalg.inv(pot.hess(y)))


def _interior_point(pot: GuilleminPotential) -> np.ndarray:
    """Chebyshev center, used as a strictly feasible Newton start."""
    cached = getattr(pot, "_center", None)
    if cached is not None:
        return cached.copy()
    norms = np.linalg.norm(pot.U, axis=1)
    res = linprog(np.r_[np.zeros(pot.n), -1.0], A_ub=np.c_[-pot.U, norms], b_ub=pot.lam,
                  bounds=[(None, None)] * pot.n + [(0, None)], method="highs")
    if not res.success or res.x[-1] <= 0:
        raise BoundaryOrExterior("polytope has empty interior")
    pot._center = res.x[:-1]
    return pot._center.copy()
