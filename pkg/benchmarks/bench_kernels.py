"""Compiled vs pure-Python flow kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--steps 2000]

Times one residual evaluation on the 2D product benchmark at 129^2 and a
fixed number of flow steps on the 1D benchmark at 257 nodes, for every
available backend, and checks that the backends agree.
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from mjtoric.classes import KahlerClassPair
from mjtoric.dual import FlowOptions, PotentialGrid, ProblemSpec, product_oracle, solve_1d_transport
from mjtoric.dual import flow as flow_mod

MARGIN = Fraction(1, 50)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_evaluate(backend, repeat):
    pair = KahlerClassPair([(1, 0), (-1, 0), (0, 1), (0, -1)], [0, 2, 0, 1], [0, 1, 0, 1])
    problem = ProblemSpec.build(pair, [1, 0])
    grid = PotentialGrid(pair.P_beta, 129, MARGIN)
    grid.set_h(product_oracle(problem).h_at)
    geom = flow_mod.FlowGeometry(problem, grid)
    kernel = flow_mod.get_kernel(backend)

    def run():
        status, _, R, _ = flow_mod._evaluate(kernel, geom, grid.u)
        assert status == flow_mod.OK
        return R

    return _best(run, repeat)


def bench_flow(backend, steps, repeat):
    pair = KahlerClassPair([(1,), (-1,)], [0, 2], [0, 1])
    problem = ProblemSpec.build(pair, [1])
    sol = solve_1d_transport(problem)
    grid = PotentialGrid(pair.P_beta, 257, MARGIN)
    opts = FlowOptions(tol=0.0, max_steps=steps, gamma=0.9, record_every=steps,
                       boundary=sol.h_at, backend=backend)

    def run():
        out, trace = flow_mod.solve_dual_flow(problem, grid, opts)
        return out.u

    return _best(run, repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if flow_mod._compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the Python fallback only")
    rows, outputs = [], {}
    for name in backends:
        t_eval, R = bench_evaluate(name, args.repeat)
        t_flow, u = bench_flow(name, args.steps, args.repeat)
        rows.append((name, t_eval, t_flow))
        outputs[name] = (R, u)

    print(f"{'backend':<8} {'evaluate 129^2':>16} {f'flow {args.steps} steps, 257':>24}")
    for name, te, tf in rows:
        print(f"{name:<8} {te * 1e3:>13.2f} ms {tf:>22.3f} s")
    if len(rows) == 2:
        (_, pe, pf), (_, ce, cf) = rows
        print(f"speedup  {pe / ce:>15.1f}x {pf / cf:>23.1f}x")
        dR = np.max(np.abs(outputs["python"][0] - outputs["cython"][0]))
        du = np.max(np.abs(outputs["python"][1] - outputs["cython"][1]))
        print(f"max backend difference: residual {dR:.2e}, u after flow {du:.2e}")


if __name__ == "__main__":
    main()
