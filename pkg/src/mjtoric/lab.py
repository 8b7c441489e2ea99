"""Seeded property suites over the matrix kernel, the regularized maximum and
the Legendre evaluator.

Every suite takes a ``numpy.random.Generator`` and a sample count and
returns a :class:`LabResult`; nothing here raises on a failed property, the
failure is recorded with its full inputs instead.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import matrix_ops as mo
from .errors import HypothesisViolated, NewtonDiverged, UnknownSuite
from .regmax import reg_max, reg_max_grad

MAX_COUNTEREXAMPLES = 20


@dataclass
class LabResult:
    suite: str
    seed: int
    samples: int
    checks: Dict[str, int] = field(default_factory=dict)
    skipped: Dict[str, int] = field(default_factory=dict)
    counterexamples: List[dict] = field(default_factory=list)
    n_failed: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    def count(self, name: str, ok: bool, **inputs) -> None:
        self.checks[name] = self.checks.get(name, 0) + 1
        if not ok:
            self.n_failed += 1
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append({"property": name, **{k: _plain(v) for k, v in inputs.items()}})

    def skip(self, name: str) -> None:
        self.skipped[name] = self.skipped.get(name, 0) + 1

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "samples": self.samples,
            "checks": dict(sorted(self.checks.items())),
            "skipped": dict(sorted(self.skipped.items())),
            "failures": self.n_failed,
            "counterexamples": self.counterexamples,
            "notes": self.notes,
            "verdict": "PASS" if self.passed else "COUNTEREXAMPLE",
        }


def _plain(v):
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return {"re": v.real.tolist(), "im": v.imag.tolist()}
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Fraction):
        return str(v)
    return v


# -- random objects -----------------------------------------------------------

def _hermitian(rng, n, complex_=True):
    M = rng.standard_normal((n, n))
    if complex_:
        M = M + 1j * rng.standard_normal((n, n))
    return (M + M.conj().T) / 2


def _spd(rng, n, complex_=True):
    M = rng.standard_normal((n, n))
    if complex_:
        M = M + 1j * rng.standard_normal((n, n))
    return M @ M.conj().T / n + 0.5 * np.eye(n)


def _capped_spectrum(rng, n, K):
    """Spectrum with ``sum 1/lam < K``."""
    w = rng.dirichlet(np.ones(n))
    s = rng.uniform(0.05, 0.999)
    return 1.0 / (s * K * w)


# -- suites -------------------------------------------------------------------

def suite_convexity(rng: np.random.Generator, samples: int) -> LabResult:
    res = LabResult("convexity", 0, samples)
    for _ in range(samples):
        n = int(rng.integers(1, 5))
        cplx = bool(rng.integers(0, 2))

        # (a) gradient against central differences along a Hermitian direction
        g, h = _spd(rng, n, cplx), _spd(rng, n, cplx)
        b = float(rng.uniform(-0.5, 5.0))
        E = _hermitian(rng, n, cplx)
        G = mo.grad_F((g, h), b)
        exact = float(np.real(np.trace(G @ E)))
        d = 1e-5
        fd = (mo.F_b((g, h + d * E), b) - mo.F_b((g, h - d * E), b)) / (2 * d)
        scale = max(abs(exact), np.linalg.norm(G) * np.linalg.norm(E), 1e-12)
        res.count("grad_F", abs(fd - exact) <= 1e-6 * scale, g=g, h=h, b=b, direction=E, exact=exact, fd=fd)

        # (b) convexity of F_b for b >= 0
        bp = float(rng.uniform(0.0, 5.0))
        B = _hermitian(rng, n, cplx)
        val = mo.hessian_form((g, h), B, bp)
        res.count("hessian_form", val >= -1e-10, g=g, h=h, b=bp, B=B, value=val)

        # (c) the four properties of f_{-eps} on Gamma_K
        K = float(rng.uniform(0.5, 5.0))
        eps = 0.9 * mo.eps_thresholds(K, n).eps1
        lam = _capped_spectrum(rng, n, K)
        f = mo.f_b(lam, -eps)
        grad = mo.f_b_grad(lam, -eps)
        res.count("f_positive", f > 0, lam=lam, K=K, eps=eps, value=f)
        res.count("grad_negative", bool(np.all(grad < 0)), lam=lam, K=K, eps=eps, grad=grad)
        order = np.argsort(lam)
        mono = bool(np.all(np.diff(grad[order]) >= -1e-12 * np.max(np.abs(grad))))
        res.count("grad_ordered", mono, lam=lam, K=K, eps=eps, grad=grad)
        H = mo.f_b_hess(lam, -eps)
        mineig = float(np.linalg.eigvalsh(H)[0])
        res.count("f_convex", mineig >= -1e-10 * max(1.0, np.max(np.abs(H))), lam=lam, K=K, eps=eps, min_eig=mineig)

        # (d) P <= F_{-eps} below the cap
        Q = mo.Q_op((g, h))
        Kd = Q * float(rng.uniform(1.0, 3.0))
        eps4 = 0.9 * mo.eps_thresholds(Kd, n).eps4
        out = mo.f_to_p_check((g, h), eps4, Kd)
        res.count("f_to_p", out.holds, g=g, h=h, K=Kd, eps=eps4, P=out.P, F=out.F)

        # (e) path lemma on admissible spectral paths (rejection sampled)
        _path_sample(rng, n, res)

        # (f) change of the reference metric
        n3 = min(n, 3)
        g1 = _spd(rng, n3, cplx)
        sigma = float(rng.uniform(1e-3, 0.25))
        S = _hermitian(rng, n3, cplx)
        S = S / max(1e-12, float(np.max(np.abs(np.linalg.eigvalsh(S)))))
        w, V = np.linalg.eigh(g1)
        root = (V * np.sqrt(w)) @ V.conj().T
        g2 = root @ (np.eye(n3) + sigma * S) @ root
        g2 = (g2 + g2.conj().T) / 2
        hh = _spd(rng, n3, cplx)
        K2 = mo.Q_op((g2, hh))
        ef = float(rng.uniform(0.0, 0.9)) * mo.eps_thresholds(K2, n3).eps4
        gap = mo.change_of_omega_gap(g1, g2, hh, ef, sigma)
        res.count("change_of_omega", gap.holds, g1=g1, g2=g2, h=hh, eps=ef, sigma=sigma,
                  gap=gap.gap, bound=gap.bound)
    return res


def _path_sample(rng, n, res: LabResult, tries: int = 50, steps: int = 65) -> None:
    for _ in range(tries):
        K = float(rng.uniform(0.5, 4.0))
        C = float(rng.uniform(0.05, 2.0))
        eps = float(rng.uniform(0.0, 0.99)) * mo.eps_thresholds(K, n, C).eps3
        lam0 = _capped_spectrum(rng, n, K)
        lam1 = _capped_spectrum(rng, n, K + 4 * C)
        t = np.linspace(0.0, 1.0, steps)[:, None]
        path = np.exp((1 - t) * np.log(lam0) + t * np.log(lam1))
        try:
            out = mo.path_guard(path, K, C, eps)
        except HypothesisViolated:
            continue
        res.count("path_guard", out.holds, K=K, C_theta=C, eps=eps, start=lam0, end=lam1, max_F0=out.max_F0)
        return
    res.skip("path_guard")


def suite_thresholds(rng: np.random.Generator, samples: int) -> LabResult:
    """Closed forms against exact rational evaluation on a fixed table."""
    res = LabResult("thresholds", 0, samples)
    for K in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)):
        for n in (1, 2, 3, 4):
            for C in (Fraction(0), Fraction(1), Fraction(2)):
                thr = mo.eps_thresholds(float(K), n, float(C))
                exact = {
                    "eps1": 2 * K ** (1 - n) / (n + 1),
                    "eps3": Fraction(n**n) * C / (2 * (K + 3 * C) ** n),
                    "eps4": K ** (1 - n),
                }
                for name, want in exact.items():
                    got = getattr(thr, name)
                    res.count(name, abs(got - float(want)) <= 1e-15 * max(1.0, float(want)),
                              K=K, n=n, C_theta=C, got=got, exact=want)
                if (K, n, C) == (1, 2, 1):
                    res.notes.append(f"K = 1, n = 2, C_theta = 1: eps1 = {thr.eps1!r}, "
                                     f"eps3 = {thr.eps3!r}, eps4 = {thr.eps4!r}")
    return res


def suite_regmax(rng: np.random.Generator, samples: int) -> LabResult:
    res = LabResult("regmax", 0, samples)
    for _ in range(samples):
        N = int(rng.integers(1, 4))
        t = rng.uniform(-2.0, 2.0, N)
        eta = rng.uniform(0.1, 1.5, N)
        M = reg_max(t, eta)

        up = t + rng.uniform(0.0, 0.5, N)
        res.count("monotone", M <= reg_max(up, eta) + 1e-10, t=t, eta=eta, t_up=up)
        s = rng.uniform(-2.0, 2.0, N)
        mid = reg_max((t + s) / 2, eta)
        res.count("convex", mid <= (M + reg_max(s, eta)) / 2 + 1e-8, t=t, s=s, eta=eta)
        res.count("bracket", np.max(t) - 1e-8 <= M <= np.max(t + eta) + 1e-8, t=t, eta=eta, value=M)
        a = float(rng.uniform(-3.0, 3.0))
        res.count("translation", abs(reg_max(t + a, eta) - (M + a)) <= 1e-8, t=t, eta=eta, a=a)

        grad = reg_max_grad(t, eta)
        res.count("sum_is_one", abs(np.sum(grad) - 1.0) <= 1e-8 and np.all(grad >= -1e-10),
                  t=t, eta=eta, grad=grad)

        if N >= 2:
            # push one argument far enough below the others to drop out
            j = int(rng.integers(0, N))
            rest = np.delete(np.arange(N), j)
            floor = np.max(t[rest] - eta[rest])
            ts = t.copy()
            ts[j] = floor - eta[j] - float(rng.uniform(0.0, 1.0))
            full = reg_max(ts, eta)
            dropped = reg_max(ts[rest], eta[rest])
            res.count("separation", abs(full - dropped) <= 1e-8, t=ts, eta=eta, dropped=j)
    return res


def suite_legendre(rng: np.random.Generator, samples: int) -> LabResult:
    from .dual.potentials import GuilleminPotential, LegendreEvaluator, legendre_eval

    res = LabResult("legendre", 0, samples)
    pots = {
        "P1": GuilleminPotential([(1,), (-1,)], [0, 1]),
        "square": GuilleminPotential([(1, 0), (-1, 0), (0, 1), (0, -1)], [0, 1, 0, 1]),
    }
    for name, pot in pots.items():
        ev = LegendreEvaluator(pot)
        n = pot.U.shape[1]
        for _ in range(samples):
            y = rng.uniform(0.01, 0.99, n)
            x = pot.grad(y[None])[0]
            Hh = pot.hess(y[None])[0]
            try:
                out = legendre_eval(ev, x)
            except NewtonDiverged:
                res.count(f"{name}_round_trip", False, y=y, x=x, error="NewtonDiverged")
                continue
            err = float(np.max(np.abs(np.asarray(out.gradient) - y)))
            res.count(f"{name}_round_trip", err <= 1e-10, y=y, error=err)
            ident = float(np.max(np.abs(np.asarray(out.hessian) @ Hh - np.eye(n))))
            res.count(f"{name}_inverse_hessian", ident <= 1e-8, y=y, error=ident)
    return res


SUITES: Dict[str, Callable[[np.random.Generator, int], LabResult]] = {
    "convexity": suite_convexity,
    "thresholds": suite_thresholds,
    "regmax": suite_regmax,
    "legendre": suite_legendre,
}

DEFAULT_SAMPLES = {"convexity": 10_000, "thresholds": 1, "regmax": 10_000, "legendre": 1_000}


def run_suite(name: str, seed: int = 0, samples=None) -> LabResult:
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    samples = DEFAULT_SAMPLES[name] if samples is None else int(samples)
    res = SUITES[name](np.random.default_rng(seed), samples)
    res.seed = seed
    return res
