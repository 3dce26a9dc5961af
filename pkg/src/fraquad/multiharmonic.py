"""First-level tables for the Green's function of the Dirichlet problem.

Two independent routes give its values on V_1: the Green matrix applied to
products of harmonic functions integrated via the quadratic eigenproblem, and
the Green matrix applied directly to the tent-function masses.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

from . import linalg
from .fractal import FractalSpec, VertexId, build_graph
from .harmonic import extension_matrices, vertex_masses


def index_pairs(spec: FractalSpec) -> List[Tuple[int, int]]:
    """Pairs (k, k') in lexicographic order, the row/column order of the product matrix."""
    nb = spec.n_boundary
    return [(k, kk) for k in range(nb) for kk in range(nb)]


@lru_cache(maxsize=32)
def product_matrix(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    """A[(k,k'),(n,n')] = sum_i mu_i h_k(F_i q_n) h_k'(F_i q_n')."""
    mats = extension_matrices(spec)
    pairs = index_pairs(spec)
    rows = []
    for k, kk in pairs:
        rows.append(tuple(
            sum((spec.mu[i] * mats[i][n][k] * mats[i][nn][kk] for i in range(spec.n_maps)), Fraction(0))
            for n, nn in pairs
        ))
    return tuple(rows)


@lru_cache(maxsize=32)
def product_integrals(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    """I[k][k'] = integral of h_k h_k' against mu, as the fixed vector of the product matrix."""
    a = product_matrix(spec)
    n = len(a)
    shifted = [[a[r][c] - (r == c) for c in range(n)] for r in range(n)]
    basis = linalg.nullspace(shifted)
    if len(basis) != 1:
        raise linalg.SingularSystem(f"fixed space of the product matrix has dimension {len(basis)}")
    v = basis[0]
    total = sum(v, Fraction(0))
    v = [x / total for x in v]
    nb = spec.n_boundary
    return tuple(tuple(v[k * nb + kk] for kk in range(nb)) for k in range(nb))


def interior_vertices(spec: FractalSpec) -> List[VertexId]:
    g1 = build_graph(spec, 1)
    bd = set(g1.boundary())
    return [v for i, v in enumerate(g1.vertices) if i not in bd]


@lru_cache(maxsize=32)
def energy_matrix(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    """X[p][q] = E(v_p, v_q) over the interior vertices of V_1."""
    g1 = build_graph(spec, 1)
    idx = [g1.index[v] for v in interior_vertices(spec)]
    rows = []
    for x in idx:
        deg = sum(g1.adjacency[x].values(), Fraction(0))
        rows.append(tuple(deg if y == x else -g1.adjacency[x].get(y, Fraction(0)) for y in idx))
    return tuple(rows)


@lru_cache(maxsize=32)
def green_matrix(spec: FractalSpec) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(r) for r in linalg.inverse([list(r) for r in energy_matrix(spec)]))


def gamma(spec: FractalSpec, i: int, ii: int, n: int, nn: int) -> Fraction:
    """Green matrix entry between F_i q_n and F_i' q_n', zero if either is a boundary point."""
    g1 = build_graph(spec, 1)
    pos = {v: k for k, v in enumerate(interior_vertices(spec))}
    a, b = g1.vertex((i,), n), g1.vertex((ii,), nn)
    if a not in pos or b not in pos:
        return Fraction(0)
    return green_matrix(spec)[pos[a]][pos[b]]


@lru_cache(maxsize=32)
def f1k_values(spec: FractalSpec) -> Tuple[Dict[VertexId, Fraction], ...]:
    """Values on V_1 of the solutions f_k of Delta f = h_k vanishing on V_0.

    f_k(F_i q_n) = sum over i', n', k' of -mu_i' gamma(i,i',n,n') I(k',n') h_k(F_i' q_k'),
    where the sum runs over every (i', n') representation of a vertex.
    """
    g1 = build_graph(spec, 1)
    mats = extension_matrices(spec)
    integ = product_integrals(spec)
    inner = interior_vertices(spec)
    pos = {v: k for k, v in enumerate(inner)}
    green = green_matrix(spec)
    nb, nm = spec.n_boundary, spec.n_maps
    out = []
    for k in range(nb):
        vals = {v: Fraction(0) for v in g1.vertices}
        for p in inner:
            s = Fraction(0)
            for ii in range(nm):
                for nn in range(nb):
                    q = g1.vertex((ii,), nn)
                    if q not in pos:
                        continue
                    gpq = green[pos[p]][pos[q]]
                    if not gpq:
                        continue
                    s -= spec.mu[ii] * gpq * sum((integ[kk][nn] * mats[ii][kk][k] for kk in range(nb)), Fraction(0))
            vals[p] = s
        out.append(vals)
    return tuple(out)


def g1_from_f1k(spec: FractalSpec) -> Dict[VertexId, Fraction]:
    """Green's function values on V_1 as minus the sum of the f_k."""
    fs = f1k_values(spec)
    return {v: -sum((f[v] for f in fs), Fraction(0)) for v in fs[0]}


def g1_green_identity(spec: FractalSpec) -> Dict[VertexId, Fraction]:
    """Green's function values on V_1 as G applied to the tent-function masses."""
    g1 = build_graph(spec, 1)
    masses = vertex_masses(g1)
    inner = interior_vertices(spec)
    green = green_matrix(spec)
    vals = {v: Fraction(0) for v in g1.vertices}
    for a, p in enumerate(inner):
        vals[p] = sum((green[a][b] * masses[g1.index[q]] for b, q in enumerate(inner)), Fraction(0))
    return vals


G1_METHODS = {"f1k": g1_from_f1k, "green-identity": g1_green_identity}


def g1_values(spec: FractalSpec, method: str = "green-identity") -> Dict[VertexId, Fraction]:
    try:
        return G1_METHODS[method](spec)
    except KeyError:
        raise ValueError(f"unknown g1 method {method!r}") from None
