"""Harmonic functions, splines, energy and the self-similar measure."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .fractal import (
    CellGraph,
    FractalSpec,
    SpecError,
    VertexId,
    Word,
    build_graph,
    mu_word,
    parse_address,
    r_word,
    words,
)


# ---------------------------------------------------------------------------
# harmonic extension
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def extension_matrices(spec: FractalSpec) -> Tuple[Tuple[Tuple[Fraction, ...], ...], ...]:
    """A_i with (A_i)[n][k] = h_k(F_i q_n), solved from the first-level Dirichlet problem."""
    g1 = build_graph(spec, 1)
    nb = spec.n_boundary
    bd = g1.boundary()
    values = []
    for k in range(nb):
        fixed = {bd[j]: Fraction(int(j == k)) for j in range(nb)}
        values.append(dirichlet_solve(g1, fixed))
    mats = []
    for i in range(spec.n_maps):
        corners = g1.cells[(i,)]
        mats.append(tuple(tuple(values[k][corners[n]] for k in range(nb)) for n in range(nb)))
    return tuple(mats)


def cell_boundary_values(spec: FractalSpec, boundary: Sequence, word: Word) -> list:
    """Values of the harmonic function with the given boundary values at F_w q_n."""
    mats = extension_matrices(spec)
    vals = list(boundary)
    for i in word:
        a = mats[i]
        vals = [sum((a[n][k] * vals[k] for k in range(len(vals))), Fraction(0)) for n in range(len(vals))]
    return vals


@dataclass(frozen=True)
class HarmonicFunction:
    spec: FractalSpec
    boundary: Tuple[Fraction, ...]

    def at(self, word: Word, n: int):
        return cell_boundary_values(self.spec, self.boundary, tuple(word))[n]

    def on_cell(self, word: Word) -> list:
        return cell_boundary_values(self.spec, self.boundary, tuple(word))


def harmonic_basis(spec: FractalSpec) -> List[HarmonicFunction]:
    nb = spec.n_boundary
    return [HarmonicFunction(spec, tuple(Fraction(int(j == k)) for j in range(nb))) for k in range(nb)]


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def harmonic_measure_integrals(spec: FractalSpec) -> Tuple[Fraction, ...]:
    """Integrals of the harmonic basis functions against mu.

    They solve iota = B iota with B[n][k] = sum_i mu_i (A_i)[k][n], normalized to sum 1.
    """
    nb = spec.n_boundary
    mats = extension_matrices(spec)
    sys = [[sum((spec.mu[i] * mats[i][k][n] for i in range(spec.n_maps)), Fraction(0)) - (n == k)
            for k in range(nb)] for n in range(nb)]
    sys.append([Fraction(1)] * nb)
    return tuple(linalg.solve(sys, [Fraction(0)] * nb + [Fraction(1)]))


class SelfSimilarMeasure:
    """The measure mu; integrates piecewise harmonic functions exactly."""

    def __init__(self, spec: FractalSpec):
        self.spec = spec
        self.iota = harmonic_measure_integrals(spec)

    def cell_weights(self, word: Word) -> list:
        m = mu_word(self.spec, word)
        return [m * x for x in self.iota]

    def total_mass(self) -> Fraction:
        return Fraction(1)


def vertex_masses(graph: CellGraph, measure=None) -> list:
    """Integral of each tent function psi_x of the graph against the measure."""
    if measure is None:
        return list(_mu_masses(graph.spec, graph.depth))
    out = [Fraction(0)] * len(graph)
    for w, corners in graph.cells.items():
        for x, c in zip(corners, measure.cell_weights(w)):
            out[x] += c
    return out


@lru_cache(maxsize=32)
def _mu_masses(spec: FractalSpec, depth: int) -> Tuple[Fraction, ...]:
    graph = build_graph(spec, depth)
    iota = harmonic_measure_integrals(spec)
    out = [Fraction(0)] * len(graph)
    for w, corners in graph.cells.items():
        m = mu_word(spec, w)
        for x, c in zip(corners, iota):
            out[x] += m * c
    return tuple(out)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def energy_form(graph: CellGraph, u: Sequence, v: Optional[Sequence] = None):
    """E_m(u, v) on Gamma_m for vertex-indexed values."""
    if v is None:
        v = u
    total = Fraction(0)
    for x, nbrs in enumerate(graph.adjacency):
        for y, c in nbrs.items():
            if y > x:
                total += c * (u[x] - u[y]) * (v[x] - v[y])
    return total


def energy(spec: FractalSpec, values: Mapping, depth: int):
    """E_m(u) for values keyed by vertex on V_m."""
    graph = build_graph(spec, depth)
    return energy_form(graph, as_vector(graph, values))


def as_vector(graph: CellGraph, values) -> list:
    if isinstance(values, (list, tuple)):
        return list(values)
    out = [None] * len(graph)
    for k, val in values.items():
        out[graph.lookup(k)] = val
    if any(x is None for x in out):
        raise SpecError("values missing on some vertices")
    return out


# ---------------------------------------------------------------------------
# splines
# ---------------------------------------------------------------------------

@dataclass
class Spline:
    """Piecewise harmonic function on the cells of `graph`, stored by its vertex values."""

    graph: CellGraph
    values: list

    @property
    def spec(self) -> FractalSpec:
        return self.graph.spec

    def __call__(self, v):
        return self.values[self.graph.lookup(v)]

    def as_dict(self) -> Dict[VertexId, Fraction]:
        return dict(zip(self.graph.vertices, self.values))

    def integral(self, measure=None):
        masses = vertex_masses(self.graph, measure)
        return sum((m * v for m, v in zip(masses, self.values)), Fraction(0))

    def energy(self):
        return energy_form(self.graph, self.values)

    def refine(self, depth: int) -> "Spline":
        return Spline(build_graph(self.spec, depth), extend_values(self.graph, self.values, depth))


def extend_values(graph: CellGraph, values: Sequence, depth: int) -> list:
    """Harmonic extension of a spline from graph.depth to a deeper graph."""
    spec = graph.spec
    if depth < graph.depth:
        raise ValueError("cannot extend to a shallower depth")
    target = build_graph(spec, depth)
    out: list = [None] * len(target)
    for x, v in zip(graph.vertices, values):
        out[target.locate(x.word, x.index)] = v
    mats = extension_matrices(spec)
    nb = spec.n_boundary
    for level in range(graph.depth, depth):
        for w in words(spec.n_maps, level):
            corners = [out[target.locate(w, n)] for n in range(nb)]
            for i in range(spec.n_maps):
                a = mats[i]
                for n in range(nb):
                    x = target.locate(w + (i,), n)
                    if out[x] is None:
                        out[x] = sum((a[n][k] * corners[k] for k in range(nb)), Fraction(0))
    return out


def _resolve_nodes(graph: CellGraph, nodes: Iterable) -> List[int]:
    idx = sorted({graph.lookup(v) for v in nodes})
    if not idx:
        raise SpecError("spline needs at least one node")
    return idx


def node_depth(spec: FractalSpec, nodes: Iterable) -> int:
    """Smallest m with every node in V_m."""
    from .fractal import canonicalize

    best = 0
    for v in nodes:
        if isinstance(v, str):
            v = parse_address(v)
        if isinstance(v, VertexId):
            v = (v.word, v.index)
        best = max(best, canonicalize(spec, *v).depth)
    return best


def laplacian_rows(graph: CellGraph, unknowns: Sequence[int]):
    """Rows of the graph Laplacian restricted to `unknowns` and the coupling to the rest."""
    pos = set(unknowns)
    rows: Dict[int, Dict[int, Fraction]] = {}
    coupling: Dict[int, Dict[int, Fraction]] = {}
    for x in unknowns:
        row = {x: Fraction(0)}
        cpl = {}
        for y, c in graph.adjacency[x].items():
            row[x] += c
            if y in pos:
                row[y] = -c
            else:
                cpl[y] = c
        rows[x] = row
        coupling[x] = cpl
    return rows, coupling


class _Factored:
    def __init__(self, graph: CellGraph, unknowns: List[int], exact: bool):
        rows, self.coupling = laplacian_rows(graph, unknowns)
        if not exact:
            rows = {k: {j: float(v) for j, v in r.items()} for k, r in rows.items()}
            self.coupling = {k: {j: float(v) for j, v in r.items()} for k, r in self.coupling.items()}
        order = sorted(unknowns, key=lambda x: (-graph.vertices[x].depth, x))
        self.factor = linalg.SparseFactor(rows, order) if unknowns else None
        self.unknowns = unknowns


def _use_exact(exact: Optional[bool], n_unknowns: int) -> bool:
    if exact is None:
        return n_unknowns <= linalg.EXACT_LIMIT
    return exact


def dirichlet_solve(graph: CellGraph, fixed: Mapping[int, Fraction], exact: Optional[bool] = True) -> list:
    """Values harmonic on Gamma_m off `fixed`, with no flux through unfixed boundary points."""
    unknowns = [x for x in range(len(graph)) if x not in fixed]
    fac = _Factored(graph, unknowns, _use_exact(exact, len(unknowns)))
    return _apply(graph, fac, fixed)


def _apply(graph: CellGraph, fac: _Factored, fixed: Mapping[int, Fraction]) -> list:
    out = [None] * len(graph)
    for x, v in fixed.items():
        out[x] = v
    if fac.factor is not None:
        rhs = {x: sum((c * fixed[y] for y, c in fac.coupling[x].items()), 0) for x in fac.unknowns}
        sol = fac.factor.solve(rhs)
        for x, v in sol.items():
            out[x] = v
    return out


def solve_spline(
    spec: FractalSpec,
    nodes: Iterable,
    values: Mapping,
    depth: Optional[int] = None,
    exact: Optional[bool] = True,
) -> Spline:
    """Spline harmonic off the nodes with the prescribed node values.

    Boundary points that are not nodes get the Neumann condition; the solve is
    done on Gamma_m with m the node depth unless a deeper `depth` is given.
    """
    nodes = list(nodes)
    m = max(node_depth(spec, nodes), depth or 0)
    graph = build_graph(spec, m)
    idx = _resolve_nodes(graph, nodes)
    fixed = {}
    for k, v in values.items():
        fixed[graph.lookup(k)] = v
    missing = set(idx) - set(fixed)
    if missing:
        raise SpecError(f"no value for node {graph.vertices[min(missing)]}")
    if set(fixed) - set(idx):
        raise SpecError("value given for a vertex that is not a node")
    return Spline(graph, dirichlet_solve(graph, fixed, exact))


def indicator_splines(
    spec: FractalSpec, nodes: Iterable, depth: Optional[int] = None, exact: Optional[bool] = True
) -> Dict[VertexId, Spline]:
    """The splines v_x with v_x(y) = [x == y] on the nodes."""
    nodes = list(nodes)
    m = max(node_depth(spec, nodes), depth or 0)
    graph = build_graph(spec, m)
    idx = _resolve_nodes(graph, nodes)
    unknowns = [x for x in range(len(graph)) if x not in set(idx)]
    fac = _Factored(graph, unknowns, _use_exact(exact, len(unknowns)))
    out = {}
    for x in idx:
        fixed = {y: Fraction(int(x == y)) for y in idx}
        out[graph.vertices[x]] = Spline(graph, _apply(graph, fac, fixed))
    return out


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def graph_laplacian_estimate(graph: CellGraph, values: Sequence, measure=None) -> list:
    """Delta_m f(x) = sum_y c_xy (f(y) - f(x)) / int psi_x.

    This is the psi_x-weighted average of the Laplacian of f, so it is exact at
    interior vertices whenever the Laplacian is constant.
    """
    masses = vertex_masses(graph, measure)
    out = []
    for x, nbrs in enumerate(graph.adjacency):
        s = sum((c * (values[y] - values[x]) for y, c in nbrs.items()), Fraction(0))
        out.append(s / masses[x])
    return out


@dataclass
class ResistanceEstimate:
    value: float
    center: VertexId
    depth: int


def effective_resistances(graph: CellGraph) -> np.ndarray:
    n = len(graph)
    lap = np.zeros((n, n))
    for x, nbrs in enumerate(graph.adjacency):
        for y, c in nbrs.items():
            lap[x, y] -= float(c)
            lap[x, x] += float(c)
    pinv = np.linalg.pinv(lap)
    d = np.diag(pinv)
    return d[:, None] + d[None, :] - 2 * pinv


def estimate_resistance_radius(spec: FractalSpec, depth: int) -> ResistanceEstimate:
    """min over centers in V_m of the max effective resistance to V_m, on Gamma_m."""
    graph = build_graph(spec, depth)
    res = effective_resistances(graph)
    radii = res.max(axis=1)
    c = int(np.argmin(radii))
    return ResistanceEstimate(float(radii[c]), graph.vertices[c], depth)
