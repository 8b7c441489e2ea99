"""Exact linear algebra over Z and Q.

Everything here works on plain nested lists of ``int`` / ``Fraction`` so the
polytope code never touches floating point.
"""

from fractions import Fraction
from math import gcd
from typing import List, Sequence

Matrix = List[List[Fraction]]


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"refusing to read {x!r} ({type(x).__name__}) as an exact rational")


def _det_int(a: List[List[int]]) -> int:
    # Bareiss: every intermediate division is exact
    n = len(a)
    sign, prev = 1, 1
    for c in range(n - 1):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        for r in range(c + 1, n):
            for k in range(c + 1, n):
                a[r][k] = (a[r][k] * a[c][c] - a[r][c] * a[c][k]) // prev
        prev = a[c][c]
    return sign * a[n - 1][n - 1]


def det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant; integer matrices go through Bareiss, the rest through Gaussian elimination."""
    if rows and all(type(v) is int for r in rows for v in r):
        return Fraction(_det_int([list(r) for r in rows]))
    a = [[Fraction(v) for v in r] for r in rows]
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        p = a[c][c]
        result *= p
        for r in range(c + 1, n):
            f = a[r][c] / p
            if f:
                row_r, row_c = a[r], a[c]
                for k in range(c, n):
                    row_r[k] -= f * row_c[k]
    return sign * result


def rank(rows: Sequence[Sequence]) -> int:
    a = [[Fraction(v) for v in r] for r in rows]
    if not a:
        return 0
    m, n = len(a), len(a[0])
    rk = 0
    for c in range(n):
        piv = next((r for r in range(rk, m) if a[r][c] != 0), None)
        if piv is None:
            continue
        a[rk], a[piv] = a[piv], a[rk]
        for r in range(m):
            if r != rk and a[r][c] != 0:
                f = a[r][c] / a[rk][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[rk])]
        rk += 1
        if rk == m:
            break
    return rk


def solve(rows: Sequence[Sequence], rhs: Sequence) -> List[Fraction]:
    """Solve a square nonsingular system exactly."""
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[r][n] for r in range(n)]


def nullspace_rational(rows: Sequence[Sequence], n: int) -> Matrix:
    """Basis (list of vectors) of {x in Q^n : rows x = 0}."""
    a = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    rk = 0
    for c in range(n):
        piv = next((r for r in range(rk, len(a)) if a[r][c] != 0), None)
        if piv is None:
            continue
        a[rk], a[piv] = a[piv], a[rk]
        p = a[rk][c]
        a[rk] = [x / p for x in a[rk]]
        for r in range(len(a)):
            if r != rk and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[rk])]
        pivots.append(c)
        rk += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][fc]
        basis.append(v)
    return basis


def primitive(v: Sequence[int]) -> bool:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g == 1


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    """Row-style Hermite normal form of an integer matrix.

    Returns the nonzero rows of ``H = V A`` with ``V`` unimodular: pivots
    strictly move right, are positive, and entries above each pivot are
    reduced into ``[0, pivot)``.
    """
    a = [[int(x) for x in r] for r in rows]
    if not a:
        return []
    m, n = len(a), len(a[0])
    r0 = 0
    for c in range(n):
        if r0 == m:
            break
        # Euclid on column c among rows r0..m-1
        while True:
            nz = [r for r in range(r0, m) if a[r][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda r: abs(a[r][c]))
            a[r0], a[piv] = a[piv], a[r0]
            done = True
            for r in range(r0 + 1, m):
                if a[r][c] != 0:
                    q = a[r][c] // a[r0][c]
                    a[r] = [x - q * y for x, y in zip(a[r], a[r0])]
                    if a[r][c] != 0:
                        done = False
            if done:
                break
        if a[r0][c] == 0:
            continue
        if a[r0][c] < 0:
            a[r0] = [-x for x in a[r0]]
        p = a[r0][c]
        for r in range(r0):
            q = a[r][c] // p
            if q:
                a[r] = [x - q * y for x, y in zip(a[r], a[r0])]
        r0 += 1
    return [row for row in a[:r0]]


def integer_kernel(rows: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Lattice basis of ``{x in Z^n : rows x = 0}`` in Hermite normal form.

    Column reduction of ``rows`` carries along a unimodular ``U``; columns of
    ``U`` that end up in zero columns of ``rows U`` span the saturated kernel.
    """
    a = [[int(x) for x in r] for r in rows]
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def colop(dst, src, q):
        # column dst -= q * column src, on both a and u
        for r in a:
            r[dst] -= q * r[src]
        for r in u:
            r[dst] -= q * r[src]

    def swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in u:
            r[i], r[j] = r[j], r[i]

    c0 = 0
    for row in range(len(a)):
        if c0 == n:
            break
        while True:
            nz = [c for c in range(c0, n) if a[row][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda c: abs(a[row][c]))
            swap(c0, piv)
            done = True
            for c in range(c0 + 1, n):
                if a[row][c] != 0:
                    colop(c, c0, a[row][c] // a[row][c0])
                    if a[row][c] != 0:
                        done = False
            if done:
                break
        if a[row][c0] != 0:
            c0 += 1
    basis = [[u[i][c] for i in range(n)] for c in range(c0, n)]
    return hermite_normal_form(basis)
