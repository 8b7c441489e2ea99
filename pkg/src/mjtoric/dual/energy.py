"""Flow energies: ``E``, the accumulated change of ``J`` and the ``I`` functional.

All three are polytope integrals (pushed forward from the manifold), taken
as ``n! * cell * sum`` over interior nodes.
"""

from math import factorial

import numpy as np

from ..errors import ConvexityLost
from ._kernel_py import _derivatives
from .flow import FlowTrace, residual
from .grid import PotentialGrid
from .problem import ProblemSpec

_CHUNK = 512


def energy_E(problem: ProblemSpec, grid: PotentialGrid) -> float:
    R = residual(problem, grid)
    R = R[grid.interior_idx]
    return float(factorial(problem.n) * grid.cell * np.dot(R, R))


def functional_dJ(trace: FlowTrace) -> float:
    """Change of ``J`` over the run: minus the trapezoid integral of ``E`` in time."""
    return float(trace.dJ[-1]) if len(trace.records) else 0.0


def _derivs(grid: PotentialGrid):
    idx = grid.interior_idx
    pts = grid.points[idx]
    grad, H = _derivatives(grid.u, idx, grid.strides, 1.0 / grid.spacing,
                           grid.potential.grad(pts), grid.potential.hess(pts))
    if grid.n == 1:
        ok = H[:, 0, 0] > 0
    else:
        ok = (H[:, 0, 0] > 0) & (H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] ** 2 > 0)
    if not ok.all():
        k = int(np.flatnonzero(~ok)[0])
        where = tuple(float(v) for v in pts[k])
        raise ConvexityLost(f"D^2 h is not positive definite at y = {where}", node=int(idx[k]), location=where)
    return grad, H


def _conjugate(grid: PotentialGrid, grad, H, X):
    """Discrete Legendre transform of ``grid.h`` at the rows of ``X``.

    The sup over active nodes is refined by one Newton step at the best
    node.  Returns NaN where the best node is not interior (the sup would
    sit in the frozen ring or beyond it).
    """
    act = grid.active_idx
    Z = grid.points[act]
    hv = grid.h()[act]
    pos = -np.ones(grid.size, dtype=np.int64)
    pos[grid.interior_idx] = np.arange(grid.interior_idx.size)
    out = np.full(len(X), np.nan)
    for s in range(0, len(X), _CHUNK):
        x = X[s:s + _CHUNK]
        best = np.argmax(x @ Z.T - hv, axis=1)
        k = pos[act[best]]
        ok = k >= 0
        kk = k[ok]
        xo = x[ok]
        d = grad[kk] - xo
        step = np.linalg.solve(H[kk], d[..., None])[..., 0]
        z = Z[best[ok]]
        out[s:s + _CHUNK][ok] = np.sum(xo * z, axis=1) - hv[best[ok]] + 0.5 * np.sum(d * step, axis=1)
    return out


def compute_I(problem: ProblemSpec, grid_h: PotentialGrid, grid_hat: PotentialGrid) -> float:
    """``I = n! int_P [phi(grad h_hat) - phi(grad h)] dy`` with ``phi = g - g_hat``.

    ``g`` and ``g_hat`` are the Legendre duals of the two grid potentials.
    Values at a potential's own gradients are exact; the cross values use
    the discrete transform, and nodes whose cross sup is not interior are
    left out of the sum.  The result is nonnegative up to discretization
    error.
    """
    same = (grid_h.polytope is grid_hat.polytope or grid_h.polytope.facets == grid_hat.polytope.facets)
    if not (same and grid_h.shape == grid_hat.shape and grid_h.margin == grid_hat.margin):
        raise ValueError("both potentials must live on the same grid")
    if grid_h.n != problem.n:
        raise ValueError("grid and problem dimensions differ")
    idx = grid_h.interior_idx
    y = grid_h.points[idx]
    gh, Hh = _derivs(grid_h)
    gk, Hk = _derivs(grid_hat)
    h = grid_h.h()[idx]
    hk = grid_hat.h()[idx]
    g_at_gh = np.sum(gh * y, axis=1) - h          # g(grad h)
    ghat_at_gk = np.sum(gk * y, axis=1) - hk      # g_hat(grad h_hat)
    g_at_gk = _conjugate(grid_h, gh, Hh, gk)       # g(grad h_hat)
    ghat_at_gh = _conjugate(grid_hat, gk, Hk, gh)  # g_hat(grad h)
    term = (g_at_gk - ghat_at_gk) - (g_at_gh - ghat_at_gh)
    keep = np.isfinite(term)
    return float(factorial(problem.n) * grid_h.cell * np.sum(term[keep]))
