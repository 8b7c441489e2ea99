from fractions import Fraction as Fr

import numpy as np
import pytest

from mjtoric.classes import KahlerClassPair
from mjtoric.dual import (FlowOptions, GuilleminPotential, LegendreEvaluator, PotentialGrid, ProblemSpec,
                          QuadraticPotential, compute_I, energy_E, flow_step, guillemin_eval, legendre_eval,
                          product_oracle, residual, solve_1d_transport, solve_dual_flow)
from mjtoric.dual import flow as flow_mod
from mjtoric.errors import (BoundaryOrExterior, ConvexityLost, EndpointMismatch, InfeasibleTransport,
                            NotSeparable, SolverError)
from mjtoric.toric_core import DelzantPolytope
from oracles import P2_NORMALS, SQUARE_NORMALS, conjugate_numeric, transport_u_numeric

INTERVAL = [(1,), (-1,)]


def interval_problem(a=1, La=2, c=None):
    return ProblemSpec.build(KahlerClassPair(INTERVAL, [0, La], [0, 1]), [a], c)


def product_problem():
    return ProblemSpec.build(KahlerClassPair(SQUARE_NORMALS, [0, 2, 0, 1], [0, 1, 0, 1]), [1, 0])


def oracle_grid(problem, sol, size, margin=Fr(1, 50)):
    grid = PotentialGrid(problem.pair.P_beta, size, margin)
    grid.set_h(sol.h_at)
    return grid


# -- potentials ---------------------------------------------------------------

def test_guillemin_examples():
    P = DelzantPolytope.from_data(INTERVAL, [0, 1])
    out = guillemin_eval(P, ["1/2"])
    assert out.value == pytest.approx(0.5 * np.log(0.5))
    assert out.gradient == pytest.approx([0.0], abs=1e-15)
    assert out.hessian[0, 0] == pytest.approx(2.0)
    P2 = DelzantPolytope.from_data(P2_NORMALS, [0, 0, 1])
    y = np.array([0.2, 0.3])
    H = guillemin_eval(P2, y).hessian
    ell = np.array([0.2, 0.3, 0.5])
    assert np.allclose(H, 0.5 * np.array([[1 / ell[0] + 1 / ell[2], 1 / ell[2]],
                                          [1 / ell[2], 1 / ell[1] + 1 / ell[2]]]), rtol=1e-14)
    with pytest.raises(BoundaryOrExterior):
        guillemin_eval(P2, [0.0, 0.5])


def test_guillemin_derivatives_by_differences():
    pot = GuilleminPotential(P2_NORMALS, [0, 0, 1])
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = rng.dirichlet([2, 2, 2])[:2]
        e = 1e-6
        fd = [(pot.value(y + e * d) - pot.value(y - e * d)) / (2 * e) for d in np.eye(2)]
        assert pot.grad(y) == pytest.approx(fd, abs=1e-7)
        fdH = np.array([(pot.grad(y + e * d) - pot.grad(y - e * d)) / (2 * e) for d in np.eye(2)])
        assert pot.hess(y) == pytest.approx(fdH, abs=1e-5)


def test_legendre_quadratic_and_guillemin():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    x = np.array([0.3, -0.7])
    out = legendre_eval(LegendreEvaluator(QuadraticPotential(S)), x)
    assert out.value == pytest.approx(0.5 * x @ np.linalg.solve(S, x), abs=1e-12)
    assert np.allclose(out.hessian, np.linalg.inv(S), rtol=1e-12)
    pot = GuilleminPotential(SQUARE_NORMALS, [0, 2, 0, 1])
    for x in (np.zeros(2), np.array([1.5, -2.0]), np.array([-3.0, 4.0])):
        out = legendre_eval(LegendreEvaluator(pot), x)
        ref, yref = conjugate_numeric(pot.value, pot.grad, x, np.array([1.0, 0.5]),
                                      [(1e-12, 2 - 1e-12), (1e-12, 1 - 1e-12)])
        assert out.value == pytest.approx(ref, abs=1e-8)
        assert pot.grad(out.gradient) == pytest.approx(x, abs=1e-10)


# -- grid ---------------------------------------------------------------------

def test_grid_sets():
    P = DelzantPolytope.from_data(P2_NORMALS, [0, 0, 1])
    grid = PotentialGrid(P, 33)
    assert not np.any(grid.interior & grid.ring)
    assert np.array_equal(grid.interior | grid.ring, grid.active)
    act = grid.active.reshape(33, 33)
    for k in grid.interior_idx[::17]:
        i, j = divmod(int(k), 33)
        assert act[i - 1:i + 2, j - 1:j + 2].all()
    with pytest.raises(ValueError):
        PotentialGrid(P, 2)


def test_harmonic_extension_reproduces_affine_data():
    P = DelzantPolytope.from_data(SQUARE_NORMALS, [0, 1, 0, 1])
    grid = PotentialGrid(P, 21)
    f = lambda y: grid.potential.value(y) + 2 * y[..., 0] - y[..., 1] + 0.5
    grid.set_h(f, where="ring")
    grid.extend_ring()
    idx = grid.interior_idx
    assert grid.h()[idx] == pytest.approx(f(grid.points[idx]), abs=1e-12)


# -- closed-form oracles --------------------------------------------------------

def test_transport_oracle_against_quadrature():
    sol = solve_1d_transport(interval_problem())
    for y in (0.05, 0.3, 0.5, 0.77, 0.98):
        assert sol.u(y) == pytest.approx(transport_u_numeric(y, 1.0, 2.0, 1.0), abs=1e-12)
    assert float(sol.s(1.0)) == pytest.approx(2.0)
    # field-free case is pure scaling: s = c y
    free = solve_1d_transport(interval_problem(a=0))
    assert free.s(0.3) == pytest.approx(0.6)


def test_transport_oracle_errors():
    with pytest.raises(EndpointMismatch):
        p = interval_problem()
        solve_1d_transport(ProblemSpec(p.pair, p.ham, Fr(3), Fr(0)))
    with pytest.raises(InfeasibleTransport):
        solve_1d_transport(interval_problem(a=5))
    with pytest.raises(NotSeparable):
        product_oracle(ProblemSpec.build(KahlerClassPair(SQUARE_NORMALS, [0, 2, 0, 1], [0, 1, 0, 1]), [1, 1]))


def test_product_oracle_splits():
    sol = product_oracle(product_problem())
    assert (sol.first.c, sol.second.c, sol.second.a) == (2.0, 1.0, 0.0)
    y = np.array([[0.3, 0.6]])
    assert sol.h(y)[0] == pytest.approx(float(sol.first.h(0.3) + sol.second.h(0.6)))


# -- residual and flow ---------------------------------------------------------

def test_residual_vanishes_on_canonical_when_field_free():
    # alpha = beta and a_v = 0: h_can solves the equation exactly
    problem = ProblemSpec.build(KahlerClassPair(P2_NORMALS, [0, 0, 1], [0, 0, 1]), [0, 0])
    grid = PotentialGrid(problem.pair.P_beta, 33)
    R = residual(problem, grid)[grid.interior_idx]
    assert np.max(np.abs(R)) < 1e-9


def test_oracle_residual_is_second_order():
    problem = interval_problem()
    sol = solve_1d_transport(problem)
    res = []
    for m in (65, 129, 257):
        grid = oracle_grid(problem, sol, m)
        deep = grid.region(Fr(1, 10))[grid.interior_idx]
        res.append(np.max(np.abs(residual(problem, grid)[grid.interior_idx][deep])))
    assert 3.5 < res[0] / res[1] < 4.5 and 3.5 < res[1] / res[2] < 4.5


def test_fixed_point_takes_no_steps():
    problem = ProblemSpec.build(KahlerClassPair(INTERVAL, [0, 1], [0, 1]), [0])
    grid = PotentialGrid(problem.pair.P_beta, 33)
    _, trace = solve_dual_flow(problem, grid, FlowOptions(tol=1e-8))
    assert trace.converged and trace.steps == 0


def test_flow_converges_to_transport_oracle():
    problem = interval_problem()
    sol = solve_1d_transport(problem)
    grid = PotentialGrid(problem.pair.P_beta, 65)
    out, trace = solve_dual_flow(problem, grid, FlowOptions(tol=1e-7, gamma=0.9, boundary=sol.h_at,
                                                            record_every=200))
    assert trace.converged
    assert np.all(np.diff(trace.E) <= 1e-12) and np.all(np.diff(trace.dJ) <= 1e-15)
    deep = out.region(Fr(1, 10)) & out.interior
    err = np.max(np.abs(out.h()[deep] - sol.h_at(out.points[deep])))
    assert err < 5e-5
    assert energy_E(problem, out) == pytest.approx(trace.E[-1], rel=1e-6)


@pytest.mark.skipif(flow_mod._compiled is None, reason="compiled kernel not built")
def test_backends_agree():
    problem = product_problem()
    sol = product_oracle(problem)
    grid = PotentialGrid(problem.pair.P_beta, 33)
    grid.set_h(sol.h_at, where="ring")
    grid.extend_ring()
    Rc = residual(problem, grid, backend="cython")
    Rp = residual(problem, grid, backend="python")
    idx = grid.interior_idx
    assert np.max(np.abs(Rc[idx] - Rp[idx])) < 1e-11
    a = flow_step(problem, grid, 1e-4, backend="cython")
    b = flow_step(problem, grid, 1e-4, backend="python")
    assert np.max(np.abs(a.u - b.u)) < 1e-14
    opts = dict(max_steps=300, gamma=0.5, record_every=50, initial="keep")
    ga, ta = solve_dual_flow(problem, grid, FlowOptions(backend="cython", **opts))
    gb, tb = solve_dual_flow(problem, grid, FlowOptions(backend="python", **opts))
    assert ta.reason == tb.reason == "max_steps"
    assert np.max(np.abs(ga.u - gb.u)) < 1e-10
    assert ta.records == pytest.approx(tb.records, rel=1e-9, abs=1e-14)


def test_flow_refusals():
    with pytest.raises(SolverError):
        solve_dual_flow(interval_problem(a=5), PotentialGrid(interval_problem().pair.P_beta, 33))
    problem = interval_problem()
    grid = PotentialGrid(problem.pair.P_beta, 33)
    grid.u[grid.interior_idx] = -grid.h_can(grid.interior_idx)  # h = 0 is not strictly convex
    with pytest.raises(ConvexityLost):
        solve_dual_flow(problem, grid, FlowOptions(initial="keep"))
    with pytest.raises(ValueError):
        solve_dual_flow(problem, grid, FlowOptions(initial="bogus"))


# -- I functional ---------------------------------------------------------------

def test_I_vanishes_on_equal_potentials_and_is_nonnegative():
    problem = interval_problem()
    sol = solve_1d_transport(problem)
    grid = oracle_grid(problem, sol, 129)
    assert compute_I(problem, grid, grid) == pytest.approx(0, abs=1e-14)
    can = PotentialGrid(problem.pair.P_beta, 129)
    assert compute_I(problem, grid, can) > 0
    with pytest.raises(ValueError):
        compute_I(problem, grid, PotentialGrid(problem.pair.P_beta, 65))


def test_I_stable_under_refinement():
    problem = interval_problem()
    sol = solve_1d_transport(problem)
    vals = []
    for m in (513, 1025):
        vals.append(compute_I(problem, oracle_grid(problem, sol, m), PotentialGrid(problem.pair.P_beta, m)))
    assert abs(vals[0] - vals[1]) / abs(vals[1]) < 1e-3


def test_spec_point_values():
    sol = solve_1d_transport(interval_problem())
    assert float(sol.s(0.5)) == pytest.approx(0.875, abs=1e-15)
    sq = DelzantPolytope.from_data(SQUARE_NORMALS, [0, 1, 0, 1])
    out = guillemin_eval(sq, ["1/2", "1/2"])
    assert np.allclose(out.hessian, 2 * np.eye(2), atol=1e-15)
    assert np.allclose(out.gradient, 0, atol=1e-15)
    pot = GuilleminPotential(INTERVAL, [0, 1])
    assert legendre_eval(LegendreEvaluator(pot), [0.0]).gradient == pytest.approx([0.5], abs=1e-14)


@pytest.mark.parametrize("kind", ["interval", "product"])
def test_oracle_residual_within_five_dy_squared(kind):
    problem = interval_problem() if kind == "interval" else product_problem()
    sol = solve_1d_transport(problem) if kind == "interval" else product_oracle(problem)
    m = 257 if kind == "interval" else 129
    grid = oracle_grid(problem, sol, m)
    R = residual(problem, grid)[grid.interior_idx]
    assert np.max(np.abs(R)) <= 5 * float(np.max(grid.spacing)) ** 2
