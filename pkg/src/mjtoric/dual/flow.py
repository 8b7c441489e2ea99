"""Explicit dual flow ``dh/dt = residual`` on the interior of a potential grid.

The residual of a symplectic potential ``h`` on ``P_beta`` is

    R(y) = tr(F D^2h) + b det F det D^2h - (c + A_c(y)),

with ``F = (D^2 h_alpha(y_alpha))^{-1}`` and ``grad h_alpha(y_alpha) = grad h(y)``.
Under the Legendre transform a potential flow ``dg/dt = -R`` becomes
``dh/dt = +R``, which is forward parabolic in ``h``.
"""

import os
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, List, Optional

import numpy as np

from ..errors import ConvexityLost, NewtonDiverged, SolverError
from . import _kernel_py
from .grid import PotentialGrid
from .problem import ProblemSpec

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

OK, MAX_STEPS, E_INCREASED, CONVEXITY_LOST, NEWTON_FAILED = 0, 1, 2, 3, 4
TRACE_COLUMNS = ("step", "t", "dt", "res_sup", "res_l2", "E", "dJ")


def get_kernel(name: Optional[str] = None):
    """``"cython"``, ``"python"`` or ``None`` for the default backend."""
    if name is None:
        name = "python" if os.environ.get("MJTORIC_PURE_PYTHON") or _compiled is None else "cython"
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel is not available")
        return _compiled
    if name == "python":
        return _kernel_py
    raise ValueError(f"unknown backend {name!r}")


BACKEND = "cython" if get_kernel() is _compiled else "python"


class FlowGeometry:
    """Per-node arrays consumed by the kernels."""

    def __init__(self, problem: ProblemSpec, grid: PotentialGrid):
        if grid.n != problem.n:
            raise ValueError("grid and problem dimensions differ")
        self.idx = grid.interior_idx
        if self.idx.size == 0:
            raise SolverError("grid has no interior nodes; refine it or reduce the margin")
        pts = grid.points[self.idx]
        self.points = pts
        self.strides = grid.strides
        self.inv_d = np.ascontiguousarray(1.0 / grid.spacing)
        self.gcan = np.ascontiguousarray(grid.potential.grad(pts))
        self.Hcan = np.ascontiguousarray(grid.potential.hess(pts))
        self.rhs = np.ascontiguousarray(problem.rhs(pts), dtype=float)
        alpha = problem.alpha_potential()
        self.Ua = np.ascontiguousarray(alpha.U)
        self.la = np.ascontiguousarray(alpha.lam)
        self.b = float(problem.b)
        self.cell = grid.cell
        self.nfact = float(factorial(problem.n))
        self.ya = self._initial_dual(problem, grid, alpha)

    def _initial_dual(self, problem, grid, alpha):
        # map the beta box affinely onto the alpha box; fall back to a central point
        P_a = problem.pair.P_alpha
        va = np.array([[float(x) for x in v] for v in P_a.vertices])
        lo, hi = va.min(axis=0), va.max(axis=0)
        scale = (hi - lo) / (grid.hi - grid.lo)
        ya = lo + (self.points - grid.lo) * scale
        bad = ~alpha.feasible(ya)
        if bad.any():
            from .potentials import _interior_point
            ya[bad] = _interior_point(alpha)
        return np.ascontiguousarray(ya)

    @property
    def dmin2(self) -> float:
        return float(1.0 / np.max(self.inv_d) ** 2)


def _evaluate(kernel, geom: FlowGeometry, u: np.ndarray):
    K = geom.idx.size
    R, coef = np.empty(K), np.empty(K)
    status, bad = kernel.evaluate(u, geom.idx, geom.strides, geom.inv_d, geom.gcan, geom.Hcan,
                                  geom.rhs, geom.Ua, geom.la, geom.ya, geom.b, R, coef)
    return status, bad, R, coef


def _raise_for(status, bad, geom: FlowGeometry, **extra):
    where = None if bad < 0 else tuple(float(x) for x in geom.points[bad])
    node = None if bad < 0 else int(geom.idx[bad])
    if status == CONVEXITY_LOST:
        exc = ConvexityLost(f"D^2 h is not positive definite at y = {where}", node=node, location=where)
    else:
        exc = NewtonDiverged(f"dual point solve failed at y = {where}", node=node, location=where)
    for k, v in extra.items():
        setattr(exc, k, v)
    raise exc


def residual(problem: ProblemSpec, grid: PotentialGrid, backend: Optional[str] = None) -> np.ndarray:
    """Residual on the interior nodes (NaN on every other node)."""
    geom = FlowGeometry(problem, grid)
    status, bad, R, _ = _evaluate(get_kernel(backend), geom, grid.u)
    if status != OK:
        _raise_for(status, bad, geom)
    out = np.full(grid.size, np.nan)
    out[geom.idx] = R
    return out


@dataclass
class FlowOptions:
    tol: float = 1e-6
    max_steps: int = 1_000_000
    gamma: float = 0.2
    dt: Optional[float] = None
    record_every: int = 100
    e_slack: float = 1e-8
    max_halvings: int = 20
    boundary: Optional[Callable[[np.ndarray], np.ndarray]] = None
    # "auto" extends the ring data harmonically when the interior is still zero
    initial: str = "auto"
    backend: Optional[str] = None


@dataclass
class FlowTrace:
    records: np.ndarray
    reason: str
    backend: str
    halvings: int = 0
    columns: tuple = field(default=TRACE_COLUMNS, repr=False)

    def column(self, name: str) -> np.ndarray:
        return self.records[:, self.columns.index(name)]

    @property
    def E(self) -> np.ndarray:
        return self.column("E")

    @property
    def dJ(self) -> np.ndarray:
        return self.column("dJ")

    @property
    def res_sup(self) -> np.ndarray:
        return self.column("res_sup")

    @property
    def steps(self) -> int:
        return int(self.records[-1, 0]) if len(self.records) else 0

    @property
    def converged(self) -> bool:
        return self.reason == "converged"

    @property
    def final(self) -> dict:
        return dict(zip(self.columns, self.records[-1])) if len(self.records) else {}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.records:
                fh.write(f"{int(row[0])}," + ",".join(f"{v:.17g}" for v in row[1:]) + "\n")


def stable_dt(geom: FlowGeometry, coef: np.ndarray, gamma: float) -> float:
    return gamma * geom.dmin2 / max(1.0, float(np.max(coef)))


def flow_step(problem: ProblemSpec, grid: PotentialGrid, dt: float, backend: Optional[str] = None) -> PotentialGrid:
    """One explicit step on a copy of ``grid``; the ring is left untouched."""
    geom = FlowGeometry(problem, grid)
    status, bad, R, _ = _evaluate(get_kernel(backend), geom, grid.u)
    if status != OK:
        _raise_for(status, bad, geom)
    new = grid.copy()
    new.u[geom.idx] += dt * R
    return new


def solve_dual_flow(problem: ProblemSpec, grid: PotentialGrid, opts: Optional[FlowOptions] = None):
    """Run the flow until ``sup |R| <= tol`` or ``max_steps``; returns ``(grid, trace)``.

    The input grid is not modified.  ``trace.reason`` is ``converged``,
    ``max_steps`` or ``dt_underflow``.  Convexity loss and dual-point
    failures raise with ``.grid`` (last good state) and ``.trace`` attached.
    """
    opts = opts or FlowOptions()
    if problem.min_rhs <= 0:
        raise SolverError(f"c + min A_c = {problem.min_rhs} must be positive to start the flow")
    kernel = get_kernel(opts.backend)
    backend = "cython" if kernel is _compiled else "python"
    grid = grid.copy()
    if opts.boundary is not None:
        grid.set_h(opts.boundary, where="ring")
    if opts.initial == "harmonic" or (opts.initial == "auto" and not np.any(grid.u[grid.interior_idx])):
        grid.extend_ring()
    elif opts.initial not in ("auto", "keep"):
        raise ValueError(f"unknown initial policy {opts.initial!r}")
    geom = FlowGeometry(problem, grid)
    status, bad, R, coef = _evaluate(kernel, geom, grid.u)
    if status != OK:
        _raise_for(status, bad, geom, grid=grid, trace=None)
    dt = opts.dt if opts.dt is not None else stable_dt(geom, coef, opts.gamma)
    step, t, dJ, E_prev = 0, 0.0, 0.0, -1.0
    record_first = True
    halvings = 0
    chunks: List[np.ndarray] = []
    reason = None
    every = max(1, int(opts.record_every))
    while reason is None:
        remaining = opts.max_steps - step
        buf = np.empty((remaining // every + 3, len(TRACE_COLUMNS)))
        status, step, t, dJ, E, bad, nrec = kernel.run_flow(
            grid.u, geom.idx, geom.strides, geom.inv_d, geom.gcan, geom.Hcan, geom.rhs,
            geom.Ua, geom.la, geom.ya, geom.b, dt, remaining, opts.tol, geom.cell, geom.nfact,
            step, t, dJ, E_prev, opts.e_slack, every, record_first, buf, R, coef)
        chunks.append(buf[:nrec].copy())
        if status == OK:
            reason = "converged"
        elif status == MAX_STEPS:
            reason = "max_steps"
        elif status == E_INCREASED:
            halvings += 1
            if halvings > opts.max_halvings:
                reason = "dt_underflow"
                break
            dt *= 0.5
            E_prev = E
            record_first = False
        else:
            trace = FlowTrace(np.vstack(chunks), "failed", backend, halvings)
            _raise_for(status, bad, geom, grid=grid, trace=trace)
    return grid, FlowTrace(np.vstack(chunks), reason, backend, halvings)
