"""Exact solvability checks and dual-flow solves for the modified J-equation
on compact toric manifolds."""

from .classes import (HamiltonianSpec, IntersectionConstants, KahlerClassPair, b_from_c,
                      hamiltonian_spec, intersection_constants, theta_extrema)
from .criterion import CriterionReport, FaceValue, check, face_value, threshold_scan
from .toric_core import (DelzantPolytope, Facet, enumerate_faces, lattice_volume,
                         mixed_first_derivative, validate_delzant)

__version__ = "0.1.0"

__all__ = [
    "CriterionReport", "DelzantPolytope", "FaceValue", "Facet", "HamiltonianSpec",
    "IntersectionConstants", "KahlerClassPair", "b_from_c", "check", "enumerate_faces",
    "face_value", "hamiltonian_spec", "intersection_constants", "lattice_volume",
    "mixed_first_derivative", "theta_extrema", "threshold_scan", "validate_delzant",
]
