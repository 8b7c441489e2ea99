"""Uniform grids over the moment polytope carrying ``u = h - h_can``."""

from fractions import Fraction
from itertools import product
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from .. import lattice
from ..toric_core import DelzantPolytope
from .potentials import GuilleminPotential

# tolerance that keeps nodes sitting exactly on a level set of l_i inside
_LEVEL_TOL = 1e-12


def _num(x) -> float:
    return float(x) if isinstance(x, float) else float(lattice.to_fraction(x))


class PotentialGrid:
    """Nodes of the bounding box of ``P``; the active set is ``{l_i >= margin}``.

    Interior nodes are active nodes whose whole ``3^n`` neighbourhood is
    active, so every central difference (including the mixed one) stays in
    the active set.  The remaining active nodes form the ring that carries
    Dirichlet data during a flow.
    """

    def __init__(self, polytope: DelzantPolytope, size: Union[int, Sequence[int]],
                 margin=Fraction(1, 50)):
        polytope.require_valid()
        self.polytope = polytope
        self.n = polytope.n
        sizes = (size,) * self.n if isinstance(size, int) else tuple(size)
        if len(sizes) != self.n or min(sizes) < 3:
            raise ValueError(f"grid size must give at least 3 nodes on each of {self.n} axes")
        self.shape: Tuple[int, ...] = sizes
        self.margin = _num(margin)
        verts = np.array([[float(x) for x in v] for v in polytope.vertices])
        self.lo, self.hi = verts.min(axis=0), verts.max(axis=0)
        self.axes = [np.linspace(a, b, m) for a, b, m in zip(self.lo, self.hi, sizes)]
        self.spacing = (self.hi - self.lo) / (np.array(sizes) - 1)
        mesh = np.meshgrid(*self.axes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=-1)
        self.potential = GuilleminPotential.of(polytope)
        self.ell = self.potential.ell(self.points)
        self.active = np.all(self.ell >= self.margin - _LEVEL_TOL, axis=1)
        self.interior = self._interior_mask()
        self.ring = self.active & ~self.interior
        self.u = np.zeros(self.size)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def strides(self) -> np.ndarray:
        return np.array([int(np.prod(self.shape[i + 1:])) for i in range(self.n)], dtype=np.int64)

    @property
    def cell(self) -> float:
        return float(np.prod(self.spacing))

    def _interior_mask(self) -> np.ndarray:
        act = self.active.reshape(self.shape)
        inner = np.zeros(self.shape, dtype=bool)
        core = tuple(slice(1, m - 1) for m in self.shape)
        inner[core] = True
        for shift in product((-1, 0, 1), repeat=self.n):
            sl = tuple(slice(1 + s, m - 1 + s) for s, m in zip(shift, self.shape))
            inner[core] &= act[sl]
        return inner.ravel()

    @property
    def interior_idx(self) -> np.ndarray:
        return np.flatnonzero(self.interior).astype(np.int64)

    @property
    def ring_idx(self) -> np.ndarray:
        return np.flatnonzero(self.ring).astype(np.int64)

    @property
    def active_idx(self) -> np.ndarray:
        return np.flatnonzero(self.active).astype(np.int64)

    def region(self, depth) -> np.ndarray:
        """Mask of nodes with every ``l_i >= depth``."""
        return np.all(self.ell >= _num(depth) - _LEVEL_TOL, axis=1)

    def h_can(self, idx=None) -> np.ndarray:
        pts = self.points if idx is None else self.points[idx]
        return self.potential.value(pts)

    def h(self) -> np.ndarray:
        """``h = h_can + u`` on active nodes, NaN elsewhere."""
        out = np.full(self.size, np.nan)
        idx = self.active_idx
        out[idx] = self.h_can(idx) + self.u[idx]
        return out

    def set_h(self, h: Callable[[np.ndarray], np.ndarray], where: str = "active") -> None:
        """Set ``u = h - h_can`` on the ``active``, ``ring`` or ``interior`` nodes."""
        idx = {"active": self.active_idx, "ring": self.ring_idx, "interior": self.interior_idx}[where]
        self.u[idx] = h(self.points[idx]) - self.h_can(idx)

    def extend_ring(self) -> None:
        """Replace interior ``u`` by the discrete harmonic extension of the ring values."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.linalg import spsolve

        idx = self.interior_idx
        pos = -np.ones(self.size, dtype=np.int64)
        pos[idx] = np.arange(idx.size)
        rows, cols, vals = [], [], []
        rhs = np.zeros(idx.size)
        w = 1.0 / self.spacing**2
        for i, s in enumerate(self.strides):
            rows.append(np.arange(idx.size))
            cols.append(np.arange(idx.size))
            vals.append(np.full(idx.size, -2.0 * w[i]))
            for nb in (idx + s, idx - s):
                inside = pos[nb] >= 0
                rows.append(np.flatnonzero(inside))
                cols.append(pos[nb[inside]])
                vals.append(np.full(int(inside.sum()), w[i]))
                rhs[~inside] -= w[i] * self.u[nb[~inside]]
        A = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(idx.size, idx.size)).tocsr()
        self.u[idx] = spsolve(A, rhs)

    def copy(self) -> "PotentialGrid":
        new = object.__new__(PotentialGrid)
        new.__dict__.update(self.__dict__)
        new.u = self.u.copy()
        return new

    def __repr__(self):
        return (f"PotentialGrid(shape={self.shape}, margin={self.margin}, "
                f"active={int(self.active.sum())}, interior={int(self.interior.sum())})")
