from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fraquad.fractal import SpecError, build_graph, builtin, mu_word, r_word, words
from fraquad.green import (
    SupSolver,
    compose_scaling,
    delta0_sq,
    delta1,
    g_e_values,
    g_v0_integral,
    g_v0_integral_series,
    g_v0_values,
    interpolant,
    level_set,
    pull_back,
)
from fraquad.harmonic import vertex_masses
from fraquad.linalg import SparseFactor
from fraquad.quadrature import natural_weights

F = Fraction
V0 = [":0", ":1", ":2"]
ONE_EXTRA = V0 + ["0:1"]
TWO_EXTRA = V0 + ["0:1", "0:2"]
INNER = V0 + ["01:2", "12:0", "20:1"]


def galerkin_ge(spec, nodes, m):
    """Oracle: tent-function Galerkin solution with Dirichlet data on E, on V_m."""
    g = build_graph(spec, m)
    fixed = {g.lookup(a) for a in nodes}
    unknowns = [x for x in range(len(g)) if x not in fixed]
    rows = {}
    for x in unknowns:
        row = {x: F(0)}
        for y, c in g.adjacency[x].items():
            row[x] += c
            if y not in fixed:
                row[y] = -c
        rows[x] = row
    masses = vertex_masses(g)
    sol = SparseFactor(rows, unknowns).solve({x: masses[x] for x in unknowns})
    return [sol.get(x, F(0)) for x in range(len(g))]


def integral_oracle(spec, nodes, m):
    """Integral of g_E from its V_m values plus the cellwise Green bumps."""
    g = build_graph(spec, m)
    vals = galerkin_ge(spec, nodes, m)
    spline_part = sum((mm * v for mm, v in zip(vertex_masses(g), vals)), F(0))
    bumps = sum((mu_word(spec, w) ** 2 * r_word(spec, w) for w in words(spec.n_maps, m)), F(0))
    return spline_part + bumps * g_v0_integral(spec)


@pytest.mark.parametrize("nodes, want", [(V0, F(1, 18)), (ONE_EXTRA, F(5, 162)), (TWO_EXTRA, F(1, 54)), (INNER, F(1, 90))])
def test_sg_delta0(nodes, want):
    spec = builtin("sg")
    assert delta0_sq(spec, nodes) == want
    assert integral_oracle(spec, nodes, 2) == want


@pytest.mark.parametrize("name", ["st", "sg3", "interval"])
def test_delta0_matches_galerkin_oracle(name):
    spec = builtin(name)
    for nodes in (level_set(spec, 0), level_set(spec, 1)):
        assert delta0_sq(spec, nodes) == integral_oracle(spec, [str(v) for v in nodes], 2)


def test_g_e_matches_galerkin():
    spec = builtin("sg")
    for nodes in (ONE_EXTRA, INNER):
        assert g_e_values(spec, nodes, 3).values == galerkin_ge(spec, nodes, 3)


@pytest.mark.parametrize("name", ["sg", "st", "sg3", "interval"])
def test_integral_closed_form_equals_series(name):
    spec = builtin(name)
    for method in ("green-identity", "f1k"):
        inc, q, limit = g_v0_integral_series(spec, 4, method)
        assert limit == g_v0_integral(spec, method)


def test_interval_constants():
    spec = builtin("interval")
    assert g_v0_integral(spec) == F(1, 12)
    assert delta1(spec, level_set(spec, 0)).interval.lower == F(1, 8)


def test_sg_integral():
    assert g_v0_integral(builtin("sg")) == F(1, 18)


@pytest.mark.parametrize("nodes, want", [(V0, F(1, 15)), (ONE_EXTRA, F(11, 225)), (TWO_EXTRA, F(1, 30)), (INNER, F(1, 75))])
def test_sg_delta1_exact(nodes, want):
    iv = delta1(builtin("sg"), nodes, 9).interval
    assert iv.exact and iv.lower == want


@pytest.mark.parametrize("name", ["sg", "st", "sg3"])
def test_delta1_brackets_vertex_maxima(name):
    """Vertex maxima on V_m increase toward the certified sup from below."""
    spec = builtin(name)
    nodes = level_set(spec, 0)
    iv = delta1(spec, nodes, 9).interval
    depth = 6 if name == "sg" else 4 if name == "st" else 3
    vals = g_v0_values(spec, depth)
    top = max(vals)
    assert top <= iv.upper
    assert iv.lower <= iv.upper
    assert iv.upper - iv.lower < F(1, 10 ** 12)


def value_iteration(solver, shape, levels):
    """Oracle: plain recursion for sup(H_s + g) truncated at `levels` (a lower bound)."""
    if levels == 0:
        return max(shape)
    best = None
    for top, rho, child in solver._children(shape):
        v = top + rho * value_iteration(solver, child, levels - 1)
        best = v if best is None or v > best else best
    return best


@pytest.mark.parametrize("name", ["sg", "st", "sg3"])
def test_sup_solver_dominates_value_iteration(name):
    spec = builtin(name)
    solver = SupSolver(spec)
    zero = tuple(F(0) for _ in range(spec.n_boundary))
    bounds, _ = solver.solve([zero], 8)
    lo, hi = bounds[0]
    levels = 5 if name != "sg3" else 3
    vi = value_iteration(solver, zero, levels)
    assert vi <= hi
    assert lo >= vi or hi - lo < F(1, 10 ** 6)


def test_missing_boundary_point():
    with pytest.raises(SpecError):
        delta0_sq(builtin("sg"), [":0", ":1"])


@pytest.mark.parametrize("m", [1, 2])
def test_scaling_composition_matches_direct(m):
    spec = builtin("sg")
    nodes = level_set(spec, 2)
    res = compose_scaling(spec, nodes, m)
    assert res.delta0_sq == delta0_sq(spec, nodes)
    assert res.weights == natural_weights(spec, nodes)
    assert res.delta1.contains(delta1(spec, nodes, 11).interval.lower)


def test_pull_back_pieces():
    spec = builtin("sg")
    parts = pull_back(spec, list(level_set(spec, 1)) + ["00:1"], 1)
    assert sorted(len(v) for v in parts.values()) == [3, 3, 4]


@settings(max_examples=15, deadline=None)
@given(st.lists(st.sampled_from([str(v) for v in level_set(builtin("sg"), 2) if v.depth > 0]), max_size=5, unique=True))
def test_delta0_monotone_in_nodes(extra):
    """Adding nodes cannot increase the integral of the discrepancy function."""
    spec = builtin("sg")
    base = delta0_sq(spec, V0 + extra[:-1])
    full = delta0_sq(spec, V0 + extra)
    assert 0 <= full <= base
    assert interpolant(spec, V0 + extra).integral() + full == g_v0_integral(spec)
