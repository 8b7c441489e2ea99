"""Command line front end: ``mjtoric validate | check | solve | lab``.

Exit codes: 0 success, 1 parse error, 2 invalid input, 3 criterion FAIL or
refusal to solve, 4 no convergence, 5 convexity lost, 6 lab counterexample.
"""

import argparse
import json
import os
import sys
from decimal import Context, Decimal
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .classes import (KahlerClassPair, b_from_c, hamiltonian_spec, intersection_constants,
                      theta_extrema)
from .criterion import CriterionReport, check
from .errors import (ConvexityLost, EndpointMismatch, FanMismatch, InfeasibleTransport,
                     InvalidPolytope, MJToricError, NewtonDiverged, NotSeparable, ParseError,
                     SolverError, UnknownSuite)
from .problem_file import ProblemFile, parse_file
from .toric_core import DelzantPolytope

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_FAIL, EXIT_NONCONV, EXIT_CONVEXITY, EXIT_COUNTER = range(7)
DEEP = Fraction(1, 10)


def _dec(q) -> str:
    q = Fraction(q)
    return str(Context(prec=20).divide(Decimal(q.numerator), Decimal(q.denominator)))


def _exact(q) -> dict:
    return {"exact": str(Fraction(q)), "decimal": _dec(q)}


def _emit(out_dir: Optional[str], stem: str, text: str, payload: dict) -> None:
    print(text, end="")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, stem + ".txt"), "w") as fh:
            fh.write(text)
        with open(os.path.join(out_dir, stem + ".json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load(path):
    """Parse and build the class pair; returns ``(problem, pair)`` or an exit code."""
    try:
        prob = parse_file(path)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        pair = KahlerClassPair(prob.normals, prob.alpha, prob.beta)
    except (InvalidPolytope, FanMismatch, ValueError) as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return prob, pair


# -- validate -----------------------------------------------------------------

def cmd_validate(path, out_dir: Optional[str] = None) -> int:
    try:
        prob = parse_file(path)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    lines = [f"problem: {path}", f"dimension: {prob.n}, facets: {len(prob.normals)}"]
    payload = {"input": prob.echo(), "polytopes": {}}
    ok = True
    polys = {}
    for name, lam in (("beta", prob.beta), ("alpha", prob.alpha)):
        try:
            P = DelzantPolytope.from_data(prob.normals, lam, check=False)
            rep = P.report
        except (ValueError, MJToricError) as exc:
            lines += [f"[{name}]", f"verdict: invalid ({type(exc).__name__}: {exc})"]
            payload["polytopes"][name] = {"valid": False, "error": f"{type(exc).__name__}: {exc}"}
            ok = False
            continue
        polys[name] = P
        lines.append(f"[{name}]")
        lines += ["  " + s for s in rep.lines()]
        payload["polytopes"][name] = {
            "valid": rep.valid,
            "error": None if rep.error is None else f"{type(rep.error).__name__}: {rep.error}",
            "vertices": [{"point": [str(c) for c in v.point], "facets": list(v.facets), "det": v.det}
                         for v in rep.vertices],
        }
        ok &= rep.valid
    if ok and polys["beta"].combinatorial_type() != polys["alpha"].combinatorial_type():
        lines.append("alpha and beta have different combinatorial types")
        payload["fan_mismatch"] = True
        ok = False
    lines.append("result: " + ("valid" if ok else "invalid"))
    payload["valid"] = ok
    _emit(out_dir, "validate_report", "\n".join(lines) + "\n", payload)
    return EXIT_OK if ok else EXIT_INVALID


# -- check --------------------------------------------------------------------

def _constants(prob: ProblemFile, pair: KahlerClassPair, ham):
    k = intersection_constants(pair)
    ext = theta_extrema(ham, pair)
    c = k.c_X if prob.c is None else prob.c
    return {"c_X": k.c_X, "c": c, "b": b_from_c(pair, c), "m_X": ext.m_X, "C_theta": ext.C_theta,
            "mu_bar": ham.mu_bar}


def _criterion_section(rep: CriterionReport):
    rows = [f"  {'facets':<14}{'p':>3}  {'c_X Vol':>12}  {'int A_c':>12}  {'V_1':>12}  {'value':>12}  sign"]
    faces = []
    for fv in sorted(rep.face_values, key=lambda f: (f.dim, f.facets)):
        sign = "+" if fv.value > 0 else ("0" if fv.value == 0 else "-")
        rows.append(f"  {str(fv.facets):<14}{fv.dim:>3}  {str(fv.volume_term):>12}  {str(fv.theta_term):>12}  "
                    f"{str(fv.mixed_term):>12}  {str(fv.value):>12}  {sign}")
        faces.append({"facets": list(fv.facets), "p": fv.dim, "volume_term": str(fv.volume_term),
                      "theta_term": str(fv.theta_term), "mixed_term": str(fv.mixed_term),
                      "value": _exact(fv.value), "sign": sign})
    w = rep.witness
    data = {
        "m_X": _exact(rep.m_X),
        "m_X_positive": rep.m_X_ok,
        "faces": faces,
        "min_face_value": None if rep.min_face_value is None else _exact(rep.min_face_value),
        "verdict": rep.verdict,
        "witness": None if w is None else {"facets": list(w.facets), "p": w.dim, "value": str(w.value)},
    }
    if not faces:
        rows = ["  no faces with 1 <= p <= n - 1"]
    lines = ["criterion"] + rows
    lines.append(f"  m_X = {rep.m_X} ({'positive' if rep.m_X_ok else 'not positive'})")
    if rep.min_face_value is not None:
        lines.append(f"  min face value = {rep.min_face_value}")
    if w is not None:
        lines.append(f"  witness: facets {list(w.facets)} (p = {w.dim}) value {w.value}")
    elif not rep.passed:
        lines.append("  witness: m_X is not positive")
    lines.append(f"verdict: {rep.verdict}")
    return lines, data


def _check_core(prob, pair):
    ham = hamiltonian_spec(prob.a_v, pair)
    consts = _constants(prob, pair, ham)
    rep = check(pair, ham)
    lines = ["constants"] + [f"  {k:<8}= {v}  ({_dec(v)})" for k, v in consts.items()]
    crit_lines, crit = _criterion_section(rep)
    return rep, lines + crit_lines, {"constants": {k: _exact(v) for k, v in consts.items()}, "criterion": crit}


def cmd_check(path, out_dir: Optional[str] = None) -> int:
    loaded = _load(path)
    if isinstance(loaded, int):
        return loaded
    prob, pair = loaded
    try:
        rep, lines, data = _check_core(prob, pair)
    except ValueError as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return EXIT_INVALID
    payload = {"input": prob.echo(), **data}
    _emit(out_dir or prob.out_dir, "check_report", "\n".join([f"problem: {path}"] + lines) + "\n", payload)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- solve --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_grid(path, grid, R) -> None:
    idx = grid.active_idx
    h = grid.h()
    names = [f"y{i + 1}" for i in range(grid.n)] + ["u", "h", "residual"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for k in idx:
            vals = list(grid.points[k]) + [grid.u[k], h[k], R[k]]
            fh.write(",".join(_fmt(float(v)) for v in vals) + "\n")


def _oracle(problem):
    from .dual.oracles import product_oracle, solve_1d_transport
    return solve_1d_transport(problem) if problem.n == 1 else product_oracle(problem)


def cmd_solve(path, out_dir: Optional[str] = None, force: bool = False, grid: Optional[int] = None,
              margin=None, tol: Optional[float] = None, seed: Optional[int] = None) -> int:
    from .dual.flow import FlowOptions, residual, solve_dual_flow
    from .dual.grid import PotentialGrid
    from .dual.problem import ProblemSpec

    loaded = _load(path)
    if isinstance(loaded, int):
        return loaded
    prob, pair = loaded
    opts = prob.solver
    if grid is not None:
        opts.grid = grid
    if margin is not None:
        opts.margin = Fraction(margin)
    if tol is not None:
        opts.tol = tol
    if seed is not None:
        opts.seed = seed
    out_dir = out_dir or prob.out_dir or "."
    if pair.n not in (1, 2):
        print(f"invalid problem: the solver handles n = 1 or 2, got n = {pair.n}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rep, lines, data = _check_core(prob, pair)
    except ValueError as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return EXIT_INVALID
    lines.insert(0, f"problem: {path}")
    payload = {"input": prob.echo(), **data,
               "solver_options": {"grid": opts.grid, "margin": str(opts.margin), "tol": opts.tol,
                                  "max_steps": opts.max_steps, "gamma": opts.gamma,
                                  "boundary": opts.boundary,
                                  "seed": opts.seed}}
    if not rep.passed and not force:
        lines.append("refusing to solve: the criterion fails (use --force to override)")
        payload["solver"] = {"status": "refused"}
        _emit(out_dir, "solve_report", "\n".join(lines) + "\n", payload)
        return EXIT_FAIL

    problem = ProblemSpec.build(pair, prob.a_v, prob.c)
    try:
        g0 = PotentialGrid(pair.P_beta, opts.grid, opts.margin)
    except ValueError as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return EXIT_INVALID
    oracle = None
    if opts.boundary == "oracle":
        try:
            oracle = _oracle(problem)
        except (NotSeparable, EndpointMismatch, InfeasibleTransport, ValueError) as exc:
            print(f"invalid problem: no oracle boundary data ({exc})", file=sys.stderr)
            return EXIT_INVALID
    fopts = FlowOptions(tol=opts.tol, max_steps=opts.max_steps, gamma=opts.gamma,
                        record_every=opts.record_every,
                        boundary=None if oracle is None else oracle.h_at)
    code = EXIT_OK
    solver = {}
    try:
        g, trace = solve_dual_flow(problem, g0, fopts)
    except SolverError as exc:
        trace = getattr(exc, "trace", None)
        g = getattr(exc, "grid", None)
        if isinstance(exc, ConvexityLost):
            code = EXIT_CONVEXITY
        elif isinstance(exc, NewtonDiverged):
            code = EXIT_NONCONV
        else:
            lines.append(f"refusing to solve: {exc}")
            payload["solver"] = {"status": "refused", "error": str(exc)}
            _emit(out_dir, "solve_report", "\n".join(lines) + "\n", payload)
            return EXIT_FAIL
        solver.update(status="failed", error=f"{type(exc).__name__}: {exc}",
                      location=None if exc.location is None else list(exc.location))
    else:
        solver["status"] = trace.reason
        if not trace.converged:
            code = EXIT_NONCONV

    os.makedirs(out_dir, exist_ok=True)
    if trace is not None and len(trace.records):
        trace.to_csv(os.path.join(out_dir, "trace.csv"))
        E, dJ = trace.E, trace.dJ
        fin = trace.final
        solver.update(
            steps=int(fin["step"]), t=fin["t"], dt=fin["dt"], res_sup=fin["res_sup"], res_l2=fin["res_l2"],
            dJ=fin["dJ"], halvings=trace.halvings, records=len(trace.records),
            E={"first": float(E[0]), "last": float(E[-1]), "min": float(E.min()), "max": float(E.max())},
            E_nonincreasing=bool(np.all(np.diff(E) <= 1e-8 * E[:-1])),
            dJ_nonincreasing=bool(np.all(np.diff(dJ) <= 0)),
        )
    if g is not None and code != EXIT_CONVEXITY:
        R = residual(problem, g)
        _write_grid(os.path.join(out_dir, "grid.csv"), g, R)
        if oracle is not None:
            deep = g.region(DEEP) & g.active
            solver["deep_interior_h_error"] = float(np.max(np.abs(g.h()[deep] - oracle.h_at(g.points[deep]))))
    payload["solver"] = solver
    lines.append("solver")
    for key in ("status", "error", "location", "steps", "t", "res_sup", "res_l2", "dJ", "halvings",
                "E", "E_nonincreasing", "dJ_nonincreasing", "deep_interior_h_error"):
        if key in solver:
            lines.append(f"  {key:<22}{solver[key]}")
    _emit(out_dir, "solve_report", "\n".join(lines) + "\n", payload)
    return code


# -- lab ----------------------------------------------------------------------

def cmd_lab(suite: str, seed: int = 0, samples: Optional[int] = None, out_dir: Optional[str] = None) -> int:
    from .lab import run_suite
    try:
        res = run_suite(suite, seed, samples)
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    d = res.to_dict()
    lines = [f"suite {suite}, seed {seed}, samples {res.samples}"]
    lines += [f"  {k:<24}{v} checks" for k, v in d["checks"].items()]
    lines += [f"  {k:<24}{v} skipped" for k, v in d["skipped"].items()]
    lines += d["notes"]
    for ce in d["counterexamples"]:
        lines.append("counterexample: " + json.dumps(ce, sort_keys=True))
    lines.append(f"failures: {d['failures']}")
    lines.append(f"verdict: {d['verdict']}")
    _emit(out_dir, f"lab_{suite}", "\n".join(lines) + "\n", d)
    return EXIT_OK if res.passed else EXIT_COUNTER


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mjtoric", description="Solvability checks and dual flow solves "
                                                          "for the modified J-equation on toric manifolds.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate the polytopes of a problem file")
    v.add_argument("problem")
    v.add_argument("--out", help="directory for report files")

    c = sub.add_parser("check", help="decide solvability exactly")
    c.add_argument("problem")
    c.add_argument("--out")

    s = sub.add_parser("solve", help="run the dual flow")
    s.add_argument("problem")
    s.add_argument("--out")
    s.add_argument("--force", action="store_true", help="solve even when the criterion fails")
    s.add_argument("--grid", type=int, help="nodes per axis")
    s.add_argument("--margin", help="active-set margin as a rational, e.g. 1/50")
    s.add_argument("--tol", type=float, help="target sup residual")
    s.add_argument("--seed", type=int, help="recorded in the report; the flow itself is deterministic")

    lab = sub.add_parser("lab", help="run a seeded property suite")
    lab.add_argument("suite", help="convexity, thresholds, regmax or legendre")
    lab.add_argument("--seed", type=int, default=0)
    lab.add_argument("--samples", type=int)
    lab.add_argument("--out")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.problem, args.out)
    if args.command == "check":
        return cmd_check(args.problem, args.out)
    if args.command == "solve":
        if args.margin is not None:
            try:
                Fraction(args.margin)
            except (ValueError, ZeroDivisionError):
                print(f"parse error: malformed margin {args.margin!r}", file=sys.stderr)
                return EXIT_PARSE
        return cmd_solve(args.problem, args.out, args.force, args.grid, args.margin, args.tol, args.seed)
    return cmd_lab(args.suite, args.seed, args.samples, args.out)


if __name__ == "__main__":
    sys.exit(main())
