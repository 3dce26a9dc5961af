"""Exact linear algebra over the rationals.

Dense routines work on lists of lists of Fractions. The sparse solver is
meant for graph Laplacians and eliminates unknowns in a caller-supplied
order, which keeps fill small when deep vertices go first.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Sequence

import numpy as np

Matrix = List[List[Fraction]]

# above this many unknowns, sparse solves switch to floating point
EXACT_LIMIT = 3000


class SingularSystem(ValueError):
    pass


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols] for row in a]


def matvec(a: Matrix, v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def vecmat(v: Sequence, a: Matrix) -> list:
    cols = len(a[0]) if a else 0
    out = [Fraction(0)] * cols
    for x, row in zip(v, a):
        if x:
            for j, y in enumerate(row):
                out[j] += x * y
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def scale(a: Matrix, s) -> Matrix:
    return [[s * x for x in row] for row in a]


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(map(Fraction, row)) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def nullspace(a: Matrix) -> Matrix:
    """Basis of the right null space, one vector per free column."""
    cols = len(a[0])
    red, pivots = rref(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Sequence) -> list[Fraction]:
    """Solve a x = b. Overdetermined systems must be consistent with a unique solution."""
    cols = len(a[0])
    aug = [list(row) + [Fraction(bi)] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if cols in pivots:
        raise SingularSystem("inconsistent system")
    if len(pivots) < cols:
        raise SingularSystem("system is rank deficient")
    x = [Fraction(0)] * cols
    for row, pc in zip(red, pivots):
        x[pc] = row[-1]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularSystem("matrix is singular")
    return [row[n:] for row in red]


def _rank_mod_p(rows: Matrix, p: int) -> int:
    """Rank over GF(p) of the integer matrix obtained by clearing each row's denominators."""
    ints = []
    for row in rows:
        d = lcm(*(x.denominator for x in row)) if row else 1
        ints.append([(x.numerator * (d // x.denominator)) % p for x in row])
    m = np.array(ints, dtype=np.int64)
    nrows, ncols = m.shape
    r = 0
    for c in range(ncols):
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), p - 2, p)) % p
        f = m[:, c].copy()
        f[r] = 0
        m = (m - (np.outer(f, m[r]) % p)) % p
        r += 1
        if r == nrows:
            break
    return r


def certified_solve(a: Matrix, b: Sequence, max_den: int = 10**9, prime: int = 2147483647) -> list[Fraction]:
    """Solve a consistent system with a unique solution, quickly.

    A float least-squares solution is rounded to nearby rationals, checked
    exactly against every equation, and uniqueness is certified by full
    column rank modulo a prime. Falls back to exact elimination otherwise.
    """
    cols = len(a[0])
    af = np.array([[float(x) for x in row] for row in a])
    bf = np.array([float(x) for x in b])
    xf = np.linalg.lstsq(af, bf, rcond=None)[0]
    x = [Fraction(float(v)).limit_denominator(max_den) for v in xf]
    if all(sum((c * v for c, v in zip(row, x) if c), Fraction(0)) == bi for row, bi in zip(a, b)):
        if _rank_mod_p(a, prime) == cols:
            return x
    return solve(a, b)


class SparseFactor:
    """Sparse Gaussian elimination, reusable across right-hand sides.

    `rows` maps each unknown to its nonzero entries (including the diagonal).
    Unknowns are eliminated in `order`.
    """

    def __init__(self, rows: Dict[int, Dict[int, Fraction]], order: Iterable[int]):
        work = {k: dict(v) for k, v in rows.items()}
        self.order = list(order)
        self.pivots: list[tuple[int, Fraction, Dict[int, Fraction], Dict[int, Fraction]]] = []
        for k in self.order:
            row = work.pop(k)
            piv = row.pop(k, 0)
            if piv == 0:
                raise SingularSystem(f"zero pivot at unknown {k}")
            col: Dict[int, Fraction] = {}
            for j in row:
                rj = work[j]
                ajk = rj.pop(k)
                f = ajk / piv
                col[j] = f
                for l, akl in row.items():
                    if l == j:
                        rj[j] = rj.get(j, 0) - f * akl
                    else:
                        val = rj.get(l, 0) - f * akl
                        if val:
                            rj[l] = val
                        else:
                            rj.pop(l, None)
            self.pivots.append((k, piv, row, col))

    def solve(self, rhs: Dict[int, Fraction]) -> Dict[int, Fraction]:
        b = {k: rhs.get(k, 0) for k in self.order}
        for k, piv, row, col in self.pivots:
            bk = b[k]
            if bk:
                for j, f in col.items():
                    b[j] -= f * bk
        x: Dict[int, Fraction] = {}
        for k, piv, row, col in reversed(self.pivots):
            s = b[k]
            for j, akj in row.items():
                s -= akj * x[j]
            x[k] = s / piv
        return x
