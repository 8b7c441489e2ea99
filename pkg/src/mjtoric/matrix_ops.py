"""Eigenvalue operators of a Hermitian pencil and their derivatives.

For Hermitian positive-definite ``g`` and ``h`` the endomorphism
``A = g^{-1} h`` has positive real eigenvalues ``lam``.  We work with

    f_b(lam) = sum 1/lam_i + b / prod(lam)

and its matrix version ``F_b(g, h) = f_b(eig(g^{-1} h))``.  Eigenvalues come
from the generalized symmetric problem ``h v = lam g v`` so the spectrum is
always real.
"""

from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import (HypothesisViolated, NonPositiveEigenvalue, NotDiagonal,
                     NotHermitian, NotPositiveDefinite, SandwichViolated)

HERMITIAN_TOL = 1e-10


# -- scalar symmetric function ------------------------------------------------

def _spectrum(lam) -> np.ndarray:
    if isinstance(lam, Spectrum):
        return lam.lam
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size == 0 or not np.all(lam > 0):
        raise NonPositiveEigenvalue(f"eigenvalues must be positive, got {lam}")
    return lam


@dataclass(frozen=True)
class Spectrum:
    lam: np.ndarray
    K: Optional[float] = None

    def __post_init__(self):
        lam = _spectrum(self.lam)
        object.__setattr__(self, "lam", lam)
        if self.K is not None and not np.sum(1.0 / lam) < self.K:
            raise HypothesisViolated(f"f_0 = {np.sum(1 / lam)} is not below the cap K = {self.K}", which="cap")

    @property
    def n(self) -> int:
        return self.lam.size


def f_b(lam, b: float) -> float:
    lam = _spectrum(lam)
    return float(np.sum(1.0 / lam) + b / np.prod(lam))


def f_b_grad(lam, b: float) -> np.ndarray:
    lam = _spectrum(lam)
    return -1.0 / lam**2 - b / (lam * np.prod(lam))


def f_b_hess(lam, b: float) -> np.ndarray:
    lam = _spectrum(lam)
    pi = np.prod(lam)
    H = b / (np.outer(lam, lam) * pi)
    H[np.diag_indices_from(H)] = 2.0 / lam**3 + 2.0 * b / (lam**2 * pi)
    return H


def f_b_divided(lam, b: float) -> np.ndarray:
    """``(d_i f - d_j f) / (lam_i - lam_j)`` in closed form.

    The quotient simplifies to ``(lam_i + lam_j)/(lam_i lam_j)^2 + b/(prod * lam_i lam_j)``,
    which is smooth across ``lam_i = lam_j`` and equals the limit there.
    """
    lam = _spectrum(lam)
    pi = np.prod(lam)
    L = np.outer(lam, lam)
    return (lam[:, None] + lam[None, :]) / L**2 + b / (pi * L)


# -- matrix pencils -----------------------------------------------------------

def _hermitian(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian(f"{name} must be square, got shape {M.shape}")
    if not np.iscomplexobj(M):
        M = M.astype(float)
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.conj().T)) > HERMITIAN_TOL * scale:
        raise NotHermitian(f"{name} is not Hermitian")
    return (M + M.conj().T) / 2


@dataclass(frozen=True)
class MetricPair:
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g, h = _hermitian(self.g, "g"), _hermitian(self.h, "h")
        if g.shape != h.shape:
            raise ValueError("g and h must have the same shape")
        for name, M in (("g", g), ("h", h)):
            try:
                np.linalg.cholesky(M)
            except np.linalg.LinAlgError:
                raise NotPositiveDefinite(f"{name} is not positive definite") from None
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def eig(self):
        """Eigenvalues of ``g^{-1} h`` (ascending) and ``V`` with ``V* g V = I``."""
        lam, V = linalg.eigh(self.h, self.g)
        if not np.all(lam > 0):
            raise NotPositiveDefinite("pencil has a non-positive eigenvalue")
        return lam, V

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig()[0]


def _pair(pair_or_g, h=None) -> MetricPair:
    if isinstance(pair_or_g, MetricPair):
        return pair_or_g
    if h is None:
        g, h = pair_or_g
        return MetricPair(g, h)
    return MetricPair(pair_or_g, h)


def F_b(pair, b: float) -> float:
    return f_b(_pair(pair).eigenvalues, b)


def Q_op(pair) -> float:
    return F_b(pair, 0.0)


def P_op(pair) -> float:
    """``max_k sum_{i != k} 1/lam_i``: drop the smallest reciprocal."""
    lam = _pair(pair).eigenvalues
    r = 1.0 / lam
    return float(np.sum(r) - np.min(r))


def grad_F(pair, b: float) -> np.ndarray:
    """Gradient of ``F_b`` with respect to ``h``: ``d/dt F_b(g, h + tH) = Re tr(G H)``."""
    p = _pair(pair)
    lam, V = p.eig()
    G = (V * f_b_grad(lam, b)) @ V.conj().T
    return (G + G.conj().T) / 2


def _second_variation(lam, Bt, b) -> float:
    d = np.real(np.diag(Bt))
    W = np.abs(Bt) ** 2
    np.fill_diagonal(W, 0.0)
    return float(d @ f_b_hess(lam, b) @ d + np.sum(f_b_divided(lam, b) * W))


def hessian_form(pair, B, b: float) -> float:
    """``d^2/dt^2 F_b(g, h + tB)`` at ``t = 0``."""
    p = _pair(pair)
    B = _hermitian(B, "B")
    lam, V = p.eig()
    return _second_variation(lam, V.conj().T @ B @ V, b)


def strong_convexity_form(A, B, b: float) -> float:
    """Second variation at diagonal ``A`` plus ``sum |B_ij|^2 d_i f / lam_j``."""
    A = np.atleast_2d(np.asarray(A))
    if np.any(np.abs(A - np.diag(np.diag(A))) > 0):
        raise NotDiagonal("A must be diagonal")
    lam = _spectrum(np.real(np.diag(A)))
    B = _hermitian(B, "B")
    extra = np.sum(np.abs(B) ** 2 * f_b_grad(lam, b)[:, None] / lam[None, :])
    return _second_variation(lam, B, b) + float(extra)


# -- explicit thresholds ------------------------------------------------------

@dataclass(frozen=True)
class EpsThresholds:
    K: float
    n: int
    C_theta: float
    eps1: float
    eps3: float
    eps4: float


def eps_thresholds(K: float, n: int, C_theta: float = 0.0) -> EpsThresholds:
    if K <= 0 or n < 1 or C_theta < 0:
        raise ValueError("need K > 0, n >= 1 and C_theta >= 0")
    return EpsThresholds(
        K=K, n=n, C_theta=C_theta,
        eps1=2.0 * K ** (1 - n) / (n + 1),
        eps3=n**n * C_theta / (2.0 * (K + 3.0 * C_theta) ** n),
        eps4=float(K) ** (1 - n),
    )


class PathGuard(NamedTuple):
    holds: bool
    max_F0: float


def path_guard(path: Sequence, K: float, C_theta: float, eps: float) -> PathGuard:
    """Check the path lemma on sampled spectra ``A_t``.

    Hypotheses are verified first; a failing hypothesis raises
    :class:`HypothesisViolated` naming it.  The conclusion is returned, not
    asserted, so callers can count counterexamples.
    """
    spectra = [_spectrum(lam) for lam in path]
    if not spectra:
        raise ValueError("empty path")
    n = spectra[0].size
    thr = eps_thresholds(K, n, C_theta)
    if not (eps == 0 or 0 < eps < thr.eps3):
        raise HypothesisViolated(f"eps = {eps} is not in [0, eps3 = {thr.eps3})", which="eps")
    if not f_b(spectra[0], 0.0) < K:
        raise HypothesisViolated("F_0(A_0) >= K", which="start", index=0)
    for i, lam in enumerate(spectra):
        if not f_b(lam, -eps) < K + 2 * C_theta:
            raise HypothesisViolated(f"F_-eps(A_t) >= K + 2 C_theta at sample {i}", which="path", index=i)
    f0 = [f_b(lam, 0.0) for lam in spectra]
    m = max(f0)
    return PathGuard(m < K + 3 * C_theta, m)


def change_of_omega_constant(K: float, n: int) -> float:
    return n * K + K**n * sum(comb(n, k) for k in range(1, n + 1))


class OmegaGap(NamedTuple):
    gap: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound


def change_of_omega_gap(g1, g2, h, eps: float, sigma: float, K: Optional[float] = None) -> OmegaGap:
    """``|F_{g1,-eps}(h) - F_{g2,-eps}(h)|`` against ``C(K, n) sigma``.

    ``K`` defaults to ``Q`` of ``h`` with respect to ``g2``.
    """
    p1 = MetricPair(g1, h)
    mu = linalg.eigh(_hermitian(g2, "g2"), _hermitian(g1, "g1"), eigvals_only=True)
    tol = 1e-12
    if np.min(mu) < 1 - sigma - tol or np.max(mu) > 1 + sigma + tol:
        raise SandwichViolated(f"eigenvalues of g1^-1 g2 lie in [{mu.min()}, {mu.max()}], "
                               f"outside [1 - {sigma}, 1 + {sigma}]")
    p2 = MetricPair(g2, h)
    q2 = Q_op(p2)
    if K is None:
        K = q2
    elif q2 > K:
        raise HypothesisViolated(f"Q w.r.t. g2 is {q2} > K = {K}", which="Q")
    gap = abs(F_b(p1, -eps) - F_b(p2, -eps))
    return OmegaGap(gap, change_of_omega_constant(K, p1.n) * sigma)


class FtoP(NamedTuple):
    holds: bool
    P: float
    F: float


def f_to_p_check(pair, eps: float, K: float) -> FtoP:
    p = _pair(pair)
    if Q_op(p) > K:
        raise HypothesisViolated(f"Q = {Q_op(p)} exceeds K = {K}", which="Q")
    eps4 = eps_thresholds(K, p.n).eps4
    if not 0 <= eps < eps4:
        raise HypothesisViolated(f"eps = {eps} is not in [0, eps4 = {eps4})", which="eps")
    P, F = P_op(p), F_b(p, -eps)
    # rounding slack scaled to the size of the terms
    return FtoP(P <= F + 1e-12 * max(1.0, abs(F)), P, F)


def restricted_Q(pair, basis) -> float:
    """``Q`` of the pencil compressed to the column span of ``basis``."""
    p = _pair(pair)
    S = np.asarray(basis)
    return Q_op(MetricPair(S.conj().T @ p.g @ S, S.conj().T @ p.h @ S))
