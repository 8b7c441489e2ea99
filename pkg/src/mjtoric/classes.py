"""Kähler class pairs on a shared fan and the constants built from them.

Normalization used throughout: ``int_Y chi^p = p! * Vol_L(F)`` for the face
``F`` of the moment polytope corresponding to ``Y``, so every intersection
number is an exact rational polytope quantity.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple, Sequence, Tuple

from . import lattice
from .errors import DegenerateFace, FanMismatch, InvalidPolytope
from .toric_core import (DelzantPolytope, Face, integrate_affine, lattice_volume,
                         mixed_first_derivative)


class KahlerClassPair:
    """Classes ``alpha`` (of omega) and ``beta`` (of chi) as offsets over one fan."""

    def __init__(self, normals, lam_alpha, lam_beta):
        self.normals = tuple(tuple(int(x) for x in u) for u in normals)
        self.lam_alpha = tuple(lattice.to_fraction(x) for x in lam_alpha)
        self.lam_beta = tuple(lattice.to_fraction(x) for x in lam_beta)
        if not (len(self.normals) == len(self.lam_alpha) == len(self.lam_beta)):
            raise ValueError("normals and offset vectors must have equal length")
        self.P_alpha = DelzantPolytope.from_data(self.normals, self.lam_alpha, check=False)
        self.P_beta = DelzantPolytope.from_data(self.normals, self.lam_beta, check=False)
        for name, P in (("alpha", self.P_alpha), ("beta", self.P_beta)):
            if not P.is_valid:
                raise InvalidPolytope(f"class {name} is not ample: {P.report.error}", cause=P.report.error)
        if self.P_alpha.combinatorial_type() != self.P_beta.combinatorial_type():
            raise FanMismatch("alpha and beta polytopes have different combinatorial types")
        self._mixed: dict = {}
        self._constants = None

    @property
    def n(self) -> int:
        return self.P_beta.n

    def __repr__(self):
        a = ", ".join(map(str, self.lam_alpha))
        b = ", ".join(map(str, self.lam_beta))
        return f"KahlerClassPair(normals={list(self.normals)}, lam_alpha=[{a}], lam_beta=[{b}])"

    def translated(self, shift_beta=None, shift_alpha=None) -> "KahlerClassPair":
        """Translate either polytope by a rational vector ``t`` (offsets change by ``-<u_i, t>``)."""
        def move(lam, t):
            if t is None:
                return lam
            t = [lattice.to_fraction(x) for x in t]
            return tuple(l - sum(a * b for a, b in zip(u, t)) for u, l in zip(self.normals, lam))
        return KahlerClassPair(self.normals, move(self.lam_alpha, shift_alpha), move(self.lam_beta, shift_beta))

    # restricted intersection numbers on the subvariety of a face
    def beta_power(self, face=()) -> Fraction:
        f = self.P_beta.face(face)
        return factorial(f.dim) * lattice_volume(self.P_beta, f)

    def alpha_power(self, face=()) -> Fraction:
        f = self.P_alpha.face(face)
        return factorial(f.dim) * lattice_volume(self.P_alpha, f)

    def mixed_volume(self, face=()) -> Fraction:
        """``d/ds Vol_L(F_beta + s F_alpha)`` at 0."""
        key = self.P_beta.face(face).facets
        if key not in self._mixed:
            self._mixed[key] = mixed_first_derivative(self.normals, self.lam_beta, self.lam_alpha, key)
        return self._mixed[key]

    def alpha_beta_power(self, face=()) -> Fraction:
        """``alpha . beta^(p-1)`` restricted to the face's subvariety."""
        f = self.P_beta.face(face)
        return factorial(f.dim - 1) * self.mixed_volume(f)


@dataclass(frozen=True)
class IntersectionConstants:
    c_X: Fraction
    alpha_n: Fraction
    beta_n: Fraction
    alpha_beta: Fraction  # alpha . beta^(n-1)
    n: int

    @property
    def c_X_from_definition(self) -> Fraction:
        return self.n * self.alpha_beta / self.beta_n


def intersection_constants(pair: KahlerClassPair) -> IntersectionConstants:
    if pair._constants is not None:
        return pair._constants
    v1 = pair.mixed_volume(())
    vol = lattice_volume(pair.P_beta)
    pair._constants = IntersectionConstants(
        c_X=v1 / vol,
        alpha_n=pair.alpha_power(),
        beta_n=pair.beta_power(),
        alpha_beta=pair.alpha_beta_power(),
        n=pair.n,
    )
    return pair._constants


def b_from_c(pair: KahlerClassPair, c) -> Fraction:
    c = lattice.to_fraction(c)
    k = intersection_constants(pair)
    if k.alpha_n <= 0:
        raise ValueError("alpha^n must be positive")
    return (c * k.beta_n - pair.n * k.alpha_beta) / k.alpha_n


@dataclass(frozen=True)
class HamiltonianSpec:
    """Centered affine function ``A_c(y) = <a_v, y> - mu_bar`` on ``P_beta``."""

    a_v: Tuple[Fraction, ...]
    mu_bar: Fraction

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self.a_v

    @property
    def const(self) -> Fraction:
        return -self.mu_bar

    def __call__(self, y) -> Fraction:
        return sum((a * lattice.to_fraction(x) for a, x in zip(self.a_v, y)), Fraction(0)) - self.mu_bar

    def evaluate(self, y):
        """Float evaluation for arrays of points with shape ``(..., n)``."""
        import numpy as np
        y = np.asarray(y, dtype=float)
        return y @ np.array([float(a) for a in self.a_v]) - float(self.mu_bar)

    def scaled(self, t) -> "HamiltonianSpec":
        t = lattice.to_fraction(t)
        return HamiltonianSpec(tuple(t * a for a in self.a_v), t * self.mu_bar)


def hamiltonian_spec(a_v: Sequence, pair: KahlerClassPair) -> HamiltonianSpec:
    a = tuple(lattice.to_fraction(x) for x in a_v)
    if len(a) != pair.n:
        raise ValueError(f"a_v has length {len(a)}, expected {pair.n}")
    P = pair.P_beta
    mu = integrate_affine(P, (), (a, 0)) / lattice_volume(P)
    return HamiltonianSpec(a, mu)


class ThetaExtrema(NamedTuple):
    min: Fraction
    max: Fraction
    C_theta: Fraction
    m_X: Fraction


def theta_extrema(ham: HamiltonianSpec, pair: KahlerClassPair) -> ThetaExtrema:
    vals = [ham(v) for v in pair.P_beta.vertices]
    lo, hi = min(vals), max(vals)
    c_X = intersection_constants(pair).c_X
    return ThetaExtrema(lo, hi, max(abs(lo), abs(hi)), c_X + lo)


def face_shift_I_Y(ham: HamiltonianSpec, pair: KahlerClassPair, face) -> Fraction:
    f = pair.P_beta.face(face)
    if f.dim < 1:
        raise DegenerateFace("I_Y is defined for faces of positive dimension")
    return integrate_affine(pair.P_beta, f, ham) / lattice_volume(pair.P_beta, f)


def continuity_parameters(pair: KahlerClassPair, ham: HamiltonianSpec, face, t) -> Tuple[Fraction, Fraction]:
    """``(c_t, b_t)`` along the continuity path on the subvariety of ``face``."""
    t = lattice.to_fraction(t)
    f = pair.P_beta.face(face)
    p = f.dim
    if p < 1:
        raise DegenerateFace("continuity path needs a face of positive dimension")
    c_X = intersection_constants(pair).c_X
    I_Y = face_shift_I_Y(ham, pair, f)
    beta_p = pair.beta_power(f)
    alpha_p = pair.alpha_power(f)
    ab = pair.alpha_beta_power(f)
    c_t = c_X * (t + 1) + I_Y
    b_t = (c_t * beta_p - p * ab) / alpha_p
    b_0 = ((c_X + I_Y) * beta_p - p * ab) / alpha_p
    assert b_t == b_0 + c_X * beta_p / alpha_p * t
    return c_t, b_t
