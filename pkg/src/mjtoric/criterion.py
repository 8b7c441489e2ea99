"""Exact decision procedure for solvability on toric manifolds.

The equation is solvable iff ``m_X > 0`` and, for every face ``F`` of
``P_beta`` with ``1 <= dim F <= n - 1``,

    p! * (c_X * Vol_L(F) + int_F A_c - V_1(F)) > 0,

where ``V_1`` is the first mixed derivative of the face volume in the
direction of ``alpha``.  No floating point is involved anywhere.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, List, Optional, Sequence, Tuple

from . import lattice
from .classes import (HamiltonianSpec, KahlerClassPair, hamiltonian_spec,
                      intersection_constants, theta_extrema)
from .errors import DegenerateFace, InvalidFamilyMember, MJToricError
from .toric_core import integrate_affine, lattice_volume


@dataclass(frozen=True)
class FaceValue:
    facets: Tuple[int, ...]
    dim: int
    volume_term: Fraction    # c_X * Vol_L(F_beta)
    theta_term: Fraction     # int_{F_beta} A_c
    mixed_term: Fraction     # V_1(F)

    @property
    def value(self) -> Fraction:
        return factorial(self.dim) * (self.volume_term + self.theta_term - self.mixed_term)

    @property
    def positive(self) -> bool:
        return self.value > 0


@dataclass
class CriterionReport:
    m_X: Fraction
    face_values: List[FaceValue]
    witness: Optional[FaceValue] = None
    m_X_ok: bool = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.m_X_ok = self.m_X > 0
        self.passed = self.m_X_ok and all(fv.positive for fv in self.face_values)
        if self.witness is None and not self.passed:
            bad = [fv for fv in self.face_values if not fv.positive]
            self.witness = min(bad, key=lambda fv: (fv.value, fv.dim, fv.facets)) if bad else None

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def min_face_value(self) -> Optional[Fraction]:
        return min((fv.value for fv in self.face_values), default=None)


def face_value(pair: KahlerClassPair, ham: HamiltonianSpec, face) -> FaceValue:
    F = pair.P_beta.face(face)
    p = F.dim
    if not 1 <= p <= pair.n - 1:
        raise DegenerateFace(f"face values are defined for 1 <= p <= n - 1, got p = {p}")
    c_X = intersection_constants(pair).c_X
    return FaceValue(
        facets=F.facets,
        dim=p,
        volume_term=c_X * lattice_volume(pair.P_beta, F),
        theta_term=integrate_affine(pair.P_beta, F, ham),
        mixed_term=pair.mixed_volume(F),
    )


def check(pair: KahlerClassPair, ham: HamiltonianSpec) -> CriterionReport:
    ext = theta_extrema(ham, pair)
    faces = [F for F in pair.P_beta.faces() if 1 <= F.dim <= pair.n - 1]
    return CriterionReport(ext.m_X, [face_value(pair, ham, F) for F in faces])


@dataclass
class ScanResult:
    points: List[Tuple[Fraction, bool]]
    bracket: Optional[Tuple[Fraction, Fraction]]


def linspace(lo, hi, steps: int) -> List[Fraction]:
    """``steps`` equally spaced exact rationals from ``lo`` to ``hi`` inclusive."""
    lo, hi = lattice.to_fraction(lo), lattice.to_fraction(hi)
    if steps < 2:
        return [lo]
    return [lo + (hi - lo) * k / (steps - 1) for k in range(steps)]


def threshold_scan(family: Callable, knobs: Sequence) -> ScanResult:
    """Run :func:`check` along a one-parameter family.

    ``family(knob)`` returns ``(pair, a_v)``; the Hamiltonian is centered per
    member.  The bracket is the first pair of consecutive knobs whose
    verdicts differ.
    """
    points = []
    for k in knobs:
        k = lattice.to_fraction(k)
        try:
            pair, a_v = family(k)
            rep = check(pair, hamiltonian_spec(a_v, pair))
        except MJToricError as exc:
            raise InvalidFamilyMember(f"family member at knob {k} is invalid: {exc}", knob=k) from exc
        points.append((k, rep.passed))
    bracket = None
    for (k0, v0), (k1, v1) in zip(points, points[1:]):
        if v0 != v1:
            bracket = (k0, k1)
            break
    return ScanResult(points, bracket)
