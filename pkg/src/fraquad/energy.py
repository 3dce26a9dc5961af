"""Energy measures and exact integration of piecewise harmonic functions against them.

Energy measures are written in the basis nu_jk = nu_{h_j, h_k} for j < k. On a
cell they transform by the matrices M_i, and the integrals of the harmonic
basis against the basis measures close a finite linear system.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import linalg
from .fractal import FractalSpec, SpecError, VertexId, Word
from .harmonic import Spline, cell_boundary_values, extension_matrices
from .rational import parse_rational


def decompose_pair(spec: FractalSpec, a: Sequence, b: Sequence) -> List[Fraction]:
    """Coefficients of nu_{u,v} in the nu_jk basis, u and v given by boundary values.

    c_jk = a_j b_k + a_k b_j - a_j b_j - a_k b_k.
    """
    return [a[j] * b[k] + a[k] * b[j] - a[j] * b[j] - a[k] * b[k] for j, k in spec.pairs]


@lru_cache(maxsize=64)
def energy_matrices(spec: FractalSpec) -> Tuple[Tuple[Tuple[Fraction, ...], ...], ...]:
    """M_i with (M_i)[(jk)][(lm)] = r_i^{-1} times the nu_lm coefficient of nu_{h_j o F_i, h_k o F_i}."""
    mats = extension_matrices(spec)
    pairs = spec.pairs
    out = []
    for i in range(spec.n_maps):
        a = mats[i]
        rinv = 1 / spec.r[i]
        rows = []
        for j, k in pairs:
            hj = [a[n][j] for n in range(spec.n_boundary)]
            hk = [a[n][k] for n in range(spec.n_boundary)]
            rows.append(tuple(rinv * c for c in decompose_pair(spec, hj, hk)))
        out.append(tuple(rows))
    return tuple(out)


def word_matrix(spec: FractalSpec, word: Word) -> linalg.Matrix:
    """M_w = M_{w_1} ... M_{w_m}."""
    mats = energy_matrices(spec)
    out = linalg.identity(len(spec.pairs))
    for i in word:
        out = linalg.matmul(out, [list(r) for r in mats[i]])
    return out


def pair_masses(spec: FractalSpec) -> List[Fraction]:
    """nu_jk(K) = E(h_j, h_k) = -c_jk."""
    return [-spec.conductance(j, k) for j, k in spec.pairs]


def measure_mass(spec: FractalSpec, coeffs: Sequence) -> Fraction:
    return sum((c * m for c, m in zip(coeffs, pair_masses(spec))), Fraction(0))


@lru_cache(maxsize=64)
def basic_integrals(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    """B[i][(jk)] = integral of h_i against nu_jk.

    Self-similarity gives B[i][p] = sum_l sum_q (M_l)[p][q] sum_n (A_l)[n][i] B[n][q];
    the totals sum_i B[i][p] = nu_p(K) fix the scale.
    """
    nb = spec.n_boundary
    pairs = spec.pairs
    npairs = len(pairs)
    mats = extension_matrices(spec)
    ems = energy_matrices(spec)

    def var(i, p):
        return i * npairs + p

    nvar = nb * npairs
    rows, rhs = [], []
    for i in range(nb):
        for p in range(npairs):
            row = [Fraction(0)] * nvar
            row[var(i, p)] -= 1
            for l in range(spec.n_maps):
                for q in range(npairs):
                    mpq = ems[l][p][q]
                    if not mpq:
                        continue
                    for n in range(nb):
                        if mats[l][n][i]:
                            row[var(n, q)] += mpq * mats[l][n][i]
            rows.append(row)
            rhs.append(Fraction(0))
    masses = pair_masses(spec)
    for p in range(npairs):
        row = [Fraction(0)] * nvar
        for i in range(nb):
            row[var(i, p)] = Fraction(1)
        rows.append(row)
        rhs.append(masses[p])
    sol = linalg.solve(rows, rhs) if nvar <= 60 else linalg.certified_solve(rows, rhs)
    return tuple(tuple(sol[var(i, p)] for p in range(npairs)) for i in range(nb))


def d_table(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    """D[i][j] = integral of h_i against nu_j = nu_{h_j,h_j} = -sum_{k != j} nu_jk."""
    b = basic_integrals(spec)
    pidx = {p: n for n, p in enumerate(spec.pairs)}
    nb = spec.n_boundary
    return tuple(
        tuple(-sum((b[i][pidx[tuple(sorted((j, k)))]] for k in range(nb) if k != j), Fraction(0)) for j in range(nb))
        for i in range(nb)
    )


@lru_cache(maxsize=64)
def product_basic_integrals(spec: FractalSpec) -> Tuple[Tuple[Tuple[Fraction, ...], ...], ...]:
    """Q[a][b][(jk)] = integral of h_a h_b against nu_jk.

    Same self-similar closure as basic_integrals with both factors pulled back;
    sum over a, b of Q[a][b][p] = nu_p(K) fixes the scale.
    """
    nb = spec.n_boundary
    npairs = len(spec.pairs)
    mats = extension_matrices(spec)
    ems = energy_matrices(spec)

    def var(a, b, p):
        return (a * nb + b) * npairs + p

    nvar = nb * nb * npairs
    rows, rhs = [], []
    for a in range(nb):
        for b in range(nb):
            for p in range(npairs):
                row = [Fraction(0)] * nvar
                row[var(a, b, p)] -= 1
                for l in range(spec.n_maps):
                    al = mats[l]
                    for q in range(npairs):
                        mpq = ems[l][p][q]
                        if not mpq:
                            continue
                        for n in range(nb):
                            if not al[n][a]:
                                continue
                            for nn in range(nb):
                                if al[nn][b]:
                                    row[var(n, nn, q)] += mpq * al[n][a] * al[nn][b]
                rows.append(row)
                rhs.append(Fraction(0))
    masses = pair_masses(spec)
    for p in range(npairs):
        row = [Fraction(0)] * nvar
        for a in range(nb):
            for b in range(nb):
                row[var(a, b, p)] = Fraction(1)
        rows.append(row)
        rhs.append(masses[p])
    sol = linalg.solve(rows, rhs) if nvar <= 60 else linalg.certified_solve(rows, rhs)
    return tuple(tuple(tuple(sol[var(a, b, p)] for p in range(npairs)) for b in range(nb)) for a in range(nb))


def product_energy(spec: FractalSpec, u: Sequence, v: Sequence) -> Fraction:
    """Energy of the product of the harmonic functions with boundary values u and v.

    Uses nu_{uv} = u^2 nu_v + 2 uv nu_{u,v} + v^2 nu_u.
    """
    q = product_basic_integrals(spec)
    nb = spec.n_boundary

    def against(f, g, coeffs):
        return sum((f[a] * g[b] * q[a][b][p] * c for a in range(nb) for b in range(nb)
                    for p, c in enumerate(coeffs) if c), Fraction(0))

    return (against(u, u, decompose_pair(spec, v, v)) + 2 * against(u, v, decompose_pair(spec, u, v))
            + against(v, v, decompose_pair(spec, u, u)))


def self_basis(spec: FractalSpec) -> List[List[Fraction]]:
    """Rows T[i] with nu_{h_i,h_i} = sum_p T[i][p] nu_p."""
    nb = spec.n_boundary
    out = []
    for i in range(nb):
        e = [Fraction(int(i == k)) for k in range(nb)]
        out.append(decompose_pair(spec, e, e))
    return out


def basis_convert(spec: FractalSpec, coeffs: Sequence, direction: str) -> List[Fraction]:
    """Convert between coefficients on nu_i = nu_{h_i,h_i} ("i") and on nu_jk ("jk").

    direction "i->jk" or "jk->i"; the reverse direction fails when the
    measure is not in the span of the nu_i.
    """
    t = self_basis(spec)
    if direction == "i->jk":
        return linalg.vecmat(list(coeffs), t)
    if direction == "jk->i":
        return linalg.solve(linalg.transpose(t), list(coeffs))
    raise ValueError("direction must be 'i->jk' or 'jk->i'")


def self_basis_matrices(spec: FractalSpec) -> List[linalg.Matrix]:
    """The cell matrices in the nu_i basis, T M_i T^{-1}; needs as many nu_i as pairs."""
    t = self_basis(spec)
    tinv = linalg.inverse(t)
    return [linalg.matmul(linalg.matmul(t, [list(r) for r in m]), tinv) for m in energy_matrices(spec)]


def xi_matrices(n: int) -> List[List[List[Fraction]]]:
    """Cell matrices of the n-hedron from the closed-form xi rule."""

    def xi(a, b, c):
        if a == b == c:
            return n + 2
        if a == b or a == c:
            return 2 if b != c else 0
        return 0 if b == c else 1

    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    pre = Fraction(1, n * (n + 2))
    out = []
    for i in range(n):
        rows = []
        for j, k in pairs:
            rows.append([
                pre * (xi(j, i, l) * xi(k, i, m) + xi(j, i, m) * xi(k, i, l) - xi(j, i, l) * xi(k, i, l) - xi(j, i, m) * xi(k, i, m))
                for l, m in pairs
            ])
        out.append(rows)
    return out


class EnergyMeasure:
    """A signed measure sum_p c_p nu_p."""

    def __init__(self, spec: FractalSpec, coeffs: Sequence, name: str = "energy"):
        if len(coeffs) != len(spec.pairs):
            raise SpecError("one coefficient per boundary pair is required")
        self.spec = spec
        self.coeffs = [Fraction(c) for c in coeffs]
        self.name = name
        self._rows: Dict[Word, List[Fraction]] = {(): list(self.coeffs)}
        self._basic_t = linalg.transpose([list(r) for r in basic_integrals(spec)])

    @classmethod
    def pair(cls, spec: FractalSpec, a: Sequence, b: Sequence) -> "EnergyMeasure":
        return cls(spec, decompose_pair(spec, a, b), "pair")

    @classmethod
    def kusuoka(cls, spec: FractalSpec) -> "EnergyMeasure":
        """sum_i nu_{h_i,h_i}."""
        t = self_basis(spec)
        return cls(spec, [sum((row[p] for row in t), Fraction(0)) for p in range(len(spec.pairs))], "kusuoka")

    def total_mass(self) -> Fraction:
        return measure_mass(self.spec, self.coeffs)

    def normalized(self) -> "EnergyMeasure":
        m = self.total_mass()
        if m == 0:
            raise SpecError("measure has zero total mass")
        return EnergyMeasure(self.spec, [c / m for c in self.coeffs], self.name + "/normalized")

    def row(self, word: Word) -> List[Fraction]:
        """c^T M_w, memoized along prefixes."""
        word = tuple(word)
        got = self._rows.get(word)
        if got is None:
            prev = self.row(word[:-1])
            got = linalg.vecmat(prev, [list(r) for r in energy_matrices(self.spec)[word[-1]]])
            self._rows[word] = got
        return got

    def cell_weights(self, word: Word) -> List[Fraction]:
        """Vector k_w with integral over F_w K of v equal to sum_n k_w[n] v(F_w q_n), v harmonic on the cell."""
        r = self.row(word)
        return [sum((r[p] * self._basic_t[p][n] for p in range(len(r))), Fraction(0)) for n in range(self.spec.n_boundary)]

    def cell_integral(self, boundary: Sequence, word: Word) -> Fraction:
        """Integral over F_w K of the harmonic function with the given boundary values."""
        vals = cell_boundary_values(self.spec, boundary, tuple(word))
        return sum((k * v for k, v in zip(self.cell_weights(word), vals)), Fraction(0))


def integrate_spline_energy(spline: Spline, measure: EnergyMeasure) -> Fraction:
    return spline.integral(measure)


def measure_from_dict(spec: FractalSpec, data: dict) -> EnergyMeasure:
    """{"basis": "jk", "coeffs": [[j, k, "p/q"], ...]} or {"pair": {"h": [...], "H": [...]}}.

    Optional "normalize": true scales to total mass 1; {"kusuoka": true} selects sum_i nu_i.
    """
    if data.get("kusuoka"):
        m = EnergyMeasure.kusuoka(spec)
    elif "pair" in data:
        a = [parse_rational(x) for x in data["pair"]["h"]]
        b = [parse_rational(x) for x in data["pair"]["H"]]
        if len(a) != spec.n_boundary or len(b) != spec.n_boundary:
            raise SpecError("pair functions need one boundary value per boundary point")
        m = EnergyMeasure.pair(spec, a, b)
    elif data.get("basis", "jk") == "jk":
        pidx = {p: n for n, p in enumerate(spec.pairs)}
        coeffs = [Fraction(0)] * len(spec.pairs)
        for j, k, c in data["coeffs"]:
            key = tuple(sorted((int(j), int(k))))
            if key not in pidx:
                raise SpecError(f"no boundary pair {key}")
            coeffs[pidx[key]] += parse_rational(c)
        m = EnergyMeasure(spec, coeffs)
    elif data.get("basis") == "i":
        coeffs = basis_convert(spec, [parse_rational(c) for c in data["coeffs"]], "i->jk")
        m = EnergyMeasure(spec, coeffs)
    else:
        raise SpecError(f"unknown basis {data.get('basis')!r}")
    return m.normalized() if data.get("normalize") else m


def load_measure(spec: FractalSpec, path: str) -> EnergyMeasure:
    with open(path) as fh:
        return measure_from_dict(spec, json.load(fh))
