from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import lattice
from ..classes import (HamiltonianSpec, KahlerClassPair, b_from_c, hamiltonian_spec,
                       intersection_constants, theta_extrema)
from .potentials import GuilleminPotential


@dataclass(frozen=True)
class ProblemSpec:
    """The dual equation on ``P_beta``: ``tr(F D^2h) + b det F det D^2h = c + A_c``.

    ``F`` is the inverse Hessian of the Guillemin potential of ``P_alpha``
    evaluated at the point whose gradient matches ``grad h``.
    """

    pair: KahlerClassPair
    ham: HamiltonianSpec
    c: Fraction
    b: Fraction

    @classmethod
    def build(cls, pair: KahlerClassPair, a_v: Sequence, c=None) -> "ProblemSpec":
        if pair.n not in (1, 2):
            raise ValueError(f"the dual solver supports n in {{1, 2}}, got n = {pair.n}")
        ham = hamiltonian_spec(a_v, pair)
        c = intersection_constants(pair).c_X if c is None else lattice.to_fraction(c)
        return cls(pair, ham, c, b_from_c(pair, c))

    @property
    def n(self) -> int:
        return self.pair.n

    @property
    def min_rhs(self) -> Fraction:
        """``c + min A_c`` over ``P_beta`` (exact)."""
        return self.c + theta_extrema(self.ham, self.pair).min

    def rhs(self, y) -> np.ndarray:
        return float(self.c) + self.ham.evaluate(y)

    def alpha_potential(self) -> GuilleminPotential:
        return GuilleminPotential.of(self.pair.P_alpha)

    def beta_potential(self) -> GuilleminPotential:
        return GuilleminPotential.of(self.pair.P_beta)

    def with_c(self, c) -> "ProblemSpec":
        c = lattice.to_fraction(c)
        return ProblemSpec(self.pair, self.ham, c, b_from_c(self.pair, c))

    def describe(self) -> str:
        return (f"n={self.n} c={self.c} b={self.b} "
                f"a_v=({', '.join(map(str, self.ham.a_v))}) mu_bar={self.ham.mu_bar}")
