"""Legendre-dual solver on the moment polytope (dimensions 1 and 2)."""

from .energy import compute_I, energy_E, functional_dJ
from .flow import BACKEND, FlowOptions, FlowTrace, flow_step, residual, solve_dual_flow
from .grid import PotentialGrid
from .oracles import ProductSolution, TransportSolution1D, product_oracle, solve_1d_transport
from .potentials import (GuilleminPotential, LegendreEvaluator, QuadraticPotential,
                         guillemin_eval, legendre_eval)
from .problem import ProblemSpec

__all__ = [
    "BACKEND", "FlowOptions", "FlowTrace", "GuilleminPotential", "LegendreEvaluator",
    "PotentialGrid", "ProblemSpec", "ProductSolution", "QuadraticPotential",
    "TransportSolution1D", "compute_I", "energy_E", "flow_step", "functional_dJ",
    "guillemin_eval", "legendre_eval", "product_oracle", "residual", "solve_1d_transport",
    "solve_dual_flow",
]
