"""The Green's function of the Dirichlet problem and the discrepancy functional.

For a node set E containing V_0 the discrepancy function g_E is the Green's
function g of V_0 minus the spline with nodes E that interpolates g. Its
integral is delta_0(E)^2 and its supremum is delta_1(E).

g is built level by level: on an m-cell F_w, g o F_w is the harmonic
extension of its corner values plus mu_w r_w g, so new vertices of V_{m+1}
get the harmonic extension plus mu_w r_w times the first-level values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .fractal import (
    CellGraph,
    FractalSpec,
    SpecError,
    VertexId,
    Word,
    build_graph,
    canonicalize,
    mu_word,
    parse_address,
    r_word,
    words,
)
from .harmonic import (
    Spline,
    extension_matrices,
    node_depth,
    solve_spline,
    vertex_masses,
)
from .multiharmonic import g1_values


# ---------------------------------------------------------------------------
# node sets
# ---------------------------------------------------------------------------

def normalize_nodes(spec: FractalSpec, nodes: Iterable) -> Tuple[VertexId, ...]:
    """Canonical, sorted, duplicate-free node set."""
    out = set()
    for v in nodes:
        if isinstance(v, str):
            v = parse_address(v)
        if isinstance(v, VertexId):
            v = (v.word, v.index)
        out.add(canonicalize(spec, *v))
    return tuple(sorted(out))


def level_set(spec: FractalSpec, m: int) -> Tuple[VertexId, ...]:
    return tuple(build_graph(spec, m).vertices)


def _require_boundary(spec: FractalSpec, nodes: Sequence[VertexId]) -> None:
    have = set(nodes)
    for n in range(spec.n_boundary):
        if VertexId((), n) not in have:
            raise SpecError("the node set must contain every boundary point")


# ---------------------------------------------------------------------------
# the Green's function of V_0
# ---------------------------------------------------------------------------

def _cell_g1(spec: FractalSpec, method: str) -> List[List[Fraction]]:
    g1 = build_graph(spec, 1)
    vals = g1_values(spec, method)
    return [[vals[g1.vertices[x]] for x in g1.cells[(i,)]] for i in range(spec.n_maps)]


@lru_cache(maxsize=32)
def g_v0_values(spec: FractalSpec, depth: int, method: str = "green-identity") -> Tuple[Fraction, ...]:
    """Values of the Green's function of V_0 on V_depth, indexed like build_graph(spec, depth)."""
    graph = build_graph(spec, depth)
    out: list = [None] * len(graph)
    for x in graph.boundary():
        out[x] = Fraction(0)
    if depth == 0:
        return tuple(out)
    mats = extension_matrices(spec)
    bump = _cell_g1(spec, method)
    nb, nm = spec.n_boundary, spec.n_maps
    for level in range(depth):
        for w in words(nm, level):
            corners = [out[graph.locate(w, n)] for n in range(nb)]
            t = mu_word(spec, w) * r_word(spec, w)
            for i in range(nm):
                a = mats[i]
                for n in range(nb):
                    x = graph.locate(w + (i,), n)
                    if out[x] is None:
                        out[x] = sum((a[n][k] * corners[k] for k in range(nb)), Fraction(0)) + t * bump[i][n]
    return tuple(out)


def g_v0_spline(spec: FractalSpec, depth: int, method: str = "green-identity") -> Spline:
    return Spline(build_graph(spec, depth), list(g_v0_values(spec, depth, method)))


def g_v0_integral(spec: FractalSpec, method: str = "green-identity") -> Fraction:
    """Closed form T / (1 - sum_i mu_i^2 r_i), T the integral of the first-level interpolant."""
    g1 = build_graph(spec, 1)
    vals = g1_values(spec, method)
    masses = vertex_masses(g1)
    first = sum((vals[v] * masses[i] for i, v in enumerate(g1.vertices)), Fraction(0))
    ratio = sum((m * m * r for m, r in zip(spec.mu, spec.r)), Fraction(0))
    return first / (1 - ratio)


def g_v0_integral_series(spec: FractalSpec, levels: int = 4, method: str = "green-identity"):
    """Increments of the integrals of the level interpolants, computed by explicit integration.

    Returns (increments, ratio, limit); the increments must form a geometric
    sequence, whose sum is the integral of g.
    """
    ints = [g_v0_spline(spec, m, method).integral() for m in range(levels + 1)]
    inc = [b - a for a, b in zip(ints, ints[1:])]
    ratios = {b / a for a, b in zip(inc, inc[1:]) if a}
    if len(ratios) != 1:
        raise ArithmeticError("level increments are not geometric")
    q = ratios.pop()
    return inc, q, inc[0] / (1 - q)


# ---------------------------------------------------------------------------
# discrepancy function
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _interpolant(spec: FractalSpec, nodes: Tuple[VertexId, ...], method: str) -> Spline:
    m = max(v.depth for v in nodes)
    gv = g_v0_values(spec, m, method)
    graph = build_graph(spec, m)
    return solve_spline(spec, nodes, {v: gv[graph.index[v]] for v in nodes}, depth=m)


def interpolant(spec: FractalSpec, nodes: Iterable, method: str = "green-identity") -> Spline:
    """The spline with nodes E agreeing with the Green's function of V_0 on E."""
    nodes = normalize_nodes(spec, nodes)
    _require_boundary(spec, nodes)
    return _interpolant(spec, nodes, method)


def g_e_values(spec: FractalSpec, nodes: Iterable, depth: Optional[int] = None, method: str = "green-identity") -> Spline:
    """g_E on V_depth as a vertex-value spline."""
    nodes = normalize_nodes(spec, nodes)
    _require_boundary(spec, nodes)
    m_e = max(v.depth for v in nodes)
    depth = m_e if depth is None else depth
    if depth < m_e:
        raise ValueError("depth must be at least the node depth")
    s = _interpolant(spec, nodes, method).refine(depth)
    g = g_v0_values(spec, depth, method)
    return Spline(s.graph, [a - b for a, b in zip(g, s.values)])


def delta0_sq(spec: FractalSpec, nodes: Iterable, method: str = "green-identity") -> Fraction:
    """delta_0(E)^2 = integral of g_E, exactly."""
    nodes = normalize_nodes(spec, nodes)
    _require_boundary(spec, nodes)
    return g_v0_integral(spec, method) - _interpolant(spec, nodes, method).integral()


# ---------------------------------------------------------------------------
# certified supremum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper

    def scaled(self, t) -> "Interval":
        return Interval(self.lower * t, self.upper * t)


class SupSolver:
    """Certified bounds on sup(H_a + t g) over a cell, for g the Green's function of V_0.

    Writing Phi(s) = sup(H_s + g) for corner vectors s with max(s) = 0, one has
    Phi(s) = max_i [ max(v_i) + rho_i Phi((v_i - max(v_i)) / rho_i) ],
    v_i = A_i s + g on F_i V_0, rho_i = mu_i r_i. The recursion is unrolled to a
    finite depth; shapes that recur are shared, so periodic ridges close up
    exactly. Unexpanded shapes are bounded by 0 <= Phi(s) <= Phi(0), and the
    resulting max-plus system is solved exactly by policy iteration.
    """

    def __init__(self, spec: FractalSpec, method: str = "green-identity", max_nodes: int = 200_000):
        self.spec = spec
        self.mats = extension_matrices(spec)
        self.bump = _cell_g1(spec, method)
        self.rho = [m * r for m, r in zip(spec.mu, spec.r)]
        self.max_nodes = max_nodes
        top = max(max(b) for b in self.bump)
        # sup g <= max g1 / (1 - max rho): the level increments are bounded geometrically
        self.a_priori = max(top, Fraction(0)) / (1 - max(self.rho))

    def _children(self, s):
        nb = self.spec.n_boundary
        out = []
        for i, a in enumerate(self.mats):
            v = [sum((a[n][k] * s[k] for k in range(nb)), Fraction(0)) + self.bump[i][n] for n in range(nb)]
            top = max(v)
            rho = self.rho[i]
            out.append((top, rho, tuple((x - top) / rho for x in v)))
        return out

    def solve(self, shapes: Sequence[Tuple[Fraction, ...]], budget: int):
        zero = tuple(Fraction(0) for _ in range(self.spec.n_boundary))
        ids: Dict[tuple, int] = {zero: 0}
        order = [zero]
        level = [0]
        for s in shapes:
            if s not in ids:
                ids[s] = len(order)
                order.append(s)
                level.append(0)
        edges: List[Optional[list]] = [None] * len(order)
        bound = self.a_priori
        head = 0
        while head < len(order):
            node = head
            head += 1
            if level[node] >= budget and node != 0:
                continue
            if len(order) >= self.max_nodes and node != 0:
                continue
            kids = self._children(order[node])
            best = max(k[0] for k in kids)
            kept = []
            for top, rho, shape in kids:
                if top + rho * bound <= best and top < best:
                    continue
                cid = ids.get(shape)
                if cid is None:
                    cid = ids[shape] = len(order)
                    order.append(shape)
                    level.append(level[node] + 1)
                    edges.append(None)
                kept.append((top, rho, cid))
            edges[node] = kept
        self.n_nodes = len(order)
        upper = self._policy_iteration(edges, leaf_to_root=True)
        lower = self._policy_iteration(edges, leaf_to_root=False)
        return [(lower[ids[s]], upper[ids[s]]) for s in shapes], (lower[0], upper[0])

    @staticmethod
    def _policy_iteration(edges, leaf_to_root: bool) -> List[Fraction]:
        n = len(edges)
        # each node's edge list; leaves get a single pseudo-edge
        opts = []
        for e in edges:
            if e is None:
                opts.append([(Fraction(0), Fraction(1), 0)] if leaf_to_root else [])
            else:
                opts.append(e)
        policy = [max(range(len(o)), key=lambda j: o[j][0]) if o else -1 for o in opts]
        while True:
            val = SupSolver._evaluate(opts, policy)
            changed = False
            for x in range(n):
                o = opts[x]
                if not o:
                    continue
                cur = o[policy[x]][0] + o[policy[x]][1] * val[o[policy[x]][2]]
                for j, (top, rho, c) in enumerate(o):
                    cand = top + rho * val[c]
                    if cand > cur:
                        cur = cand
                        policy[x] = j
                        changed = True
            if not changed:
                return val

    @staticmethod
    def _evaluate(opts, policy) -> List[Fraction]:
        n = len(opts)
        val: List[Optional[Fraction]] = [None] * n
        state = [0] * n  # 0 new, 1 on current path, 2 done
        for start in range(n):
            if state[start]:
                continue
            path = []
            x = start
            while True:
                if state[x] == 2:
                    break
                if state[x] == 1:
                    # cycle from x to the end of the path
                    cyc = path[path.index(x):]
                    num, prod = Fraction(0), Fraction(1)
                    for y in cyc:
                        top, rho, _ = opts[y][policy[y]]
                        num += prod * top
                        prod *= rho
                    val[x] = num / (1 - prod)
                    state[x] = 2
                    for y in reversed(cyc[1:]):
                        top, rho, c = opts[y][policy[y]]
                        val[y] = top + rho * val[c]
                        state[y] = 2
                    path = path[:path.index(x)]
                    break
                state[x] = 1
                path.append(x)
                if policy[x] < 0:
                    val[x] = Fraction(0)
                    state[x] = 2
                    path.pop()
                    break
                x = opts[x][policy[x]][2]
            for y in reversed(path):
                top, rho, c = opts[y][policy[y]]
                val[y] = top + rho * val[c]
                state[y] = 2
        return val


@dataclass
class Delta1Result:
    interval: Interval
    depth: int
    argmax: VertexId
    nodes_explored: int


def delta1(spec: FractalSpec, nodes: Iterable, depth: int = 9, method: str = "green-identity") -> Delta1Result:
    """Certified interval for sup g_E.

    Roots are the cells of depth m_E (the node depth); the recursion inside
    each root is unrolled `depth - m_E` further levels (at least one).
    """
    nodes = normalize_nodes(spec, nodes)
    _require_boundary(spec, nodes)
    m_e = max(v.depth for v in nodes)
    ge = g_e_values(spec, nodes, m_e, method)
    graph = ge.graph
    roots = []
    for w, corners in graph.cells.items():
        a = [ge.values[x] for x in corners]
        t = mu_word(spec, w) * r_word(spec, w)
        top = max(a)
        roots.append((top, t, tuple((x - top) / t for x in a)))
    solver = SupSolver(spec, method)
    shapes = list({s for _, _, s in roots})
    bounds, _ = solver.solve(shapes, max(depth - m_e, 1))
    bmap = dict(zip(shapes, bounds))
    lo = max(top + t * bmap[s][0] for top, t, s in roots)
    hi = max(top + t * bmap[s][1] for top, t, s in roots)
    best = max(range(len(graph)), key=lambda x: ge.values[x])
    return Delta1Result(Interval(lo, hi), depth, graph.vertices[best], solver.n_nodes)


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def pull_back(spec: FractalSpec, nodes: Iterable, m: int) -> Dict[Word, Tuple[VertexId, ...]]:
    """E_w = F_w^{-1}(E) for every m-cell w; requires V_m inside E."""
    nodes = normalize_nodes(spec, nodes)
    graph = build_graph(spec, m)
    have = set(nodes)
    if not set(graph.vertices) <= have:
        raise SpecError(f"the node set must contain V_{m}")
    base = tuple(VertexId((), n) for n in range(spec.n_boundary))
    out = {w: set(base) for w in graph.cells}
    for v in nodes:
        if v.depth <= m:
            continue
        w = v.word[:m]
        out[w].add(canonicalize(spec, v.word[m:], v.index))
    return {w: tuple(sorted(s)) for w, s in out.items()}


@dataclass
class ScalingResult:
    delta0_sq: Fraction
    delta1: Interval
    weights: Dict[VertexId, Fraction]


def compose_scaling(spec: FractalSpec, nodes: Iterable, m: int, depth: int = 9, method: str = "green-identity") -> ScalingResult:
    """delta_0, delta_1 and natural weights of E from the pulled-back sets E_w."""
    from .quadrature import natural_weights

    nodes = normalize_nodes(spec, nodes)
    parts = pull_back(spec, nodes, m)
    d0 = Fraction(0)
    lo = hi = None
    cache: Dict[tuple, tuple] = {}
    weights: Dict[VertexId, Fraction] = {v: Fraction(0) for v in nodes}
    for w, sub in parts.items():
        if sub not in cache:
            iv = delta1(spec, sub, depth + max(v.depth for v in sub), method).interval
            cache[sub] = (delta0_sq(spec, sub, method), iv, natural_weights(spec, sub))
        sq, iv, pw = cache[sub]
        t = mu_word(spec, w) * r_word(spec, w)
        d0 += mu_word(spec, w) * t * sq
        lo = iv.lower * t if lo is None else max(lo, iv.lower * t)
        hi = iv.upper * t if hi is None else max(hi, iv.upper * t)
        mw = mu_word(spec, w)
        for y, p in pw.items():
            weights[canonicalize(spec, w + y.word, y.index)] += mw * p
    return ScalingResult(d0, Interval(lo, hi), weights)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def g_e_norm_estimate(spec: FractalSpec, nodes: Iterable, q: float, depth: int, method: str = "green-identity") -> float:
    """Estimate of the L^q(mu) norm of g_E by integrating the level interpolant of g_E^q.

    q = inf returns the upper end of the certified supremum.
    """
    if q == float("inf"):
        return float(delta1(spec, nodes, depth, method).interval.upper)
    ge = g_e_values(spec, nodes, depth, method)
    masses = vertex_masses(ge.graph)
    if q == 1:
        return float(sum((m * v for m, v in zip(masses, ge.values)), Fraction(0)))
    total = sum(float(m) * abs(float(v)) ** q for m, v in zip(masses, ge.values))
    return total ** (1.0 / q)
