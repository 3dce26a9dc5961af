import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fraquad import energy as en
from fraquad import multiharmonic as mh
from fraquad.fractal import VertexId, build_graph, builtin
from fraquad.green import delta0_sq, delta1, g_v0_integral, g_v0_values, level_set
from fraquad.harmonic import cell_boundary_values, effective_resistances, energy_form, indicator_splines, solve_spline
from fraquad.quadrature import (
    discrepancy_coefficient,
    error_budget,
    integrate,
    natural_weights,
    uniform_weights,
)

F = Fraction
BUILTINS = ["sg", "st", "sg3", "interval"]


def weights_str(p):
    return {str(v): w for v, w in p.items()}


@pytest.mark.parametrize("name", BUILTINS)
def test_natural_weights_are_indicator_integrals(name):
    spec = builtin(name)
    g = build_graph(spec, 2)
    nodes = [g.vertices[x] for x in g.boundary()] + list(g.vertices[len(g) // 2:len(g) // 2 + 3])
    p = natural_weights(spec, nodes)
    for v, s in indicator_splines(spec, nodes).items():
        assert p[v] == s.integral()


def test_sg_weights():
    spec = builtin("sg")
    assert weights_str(natural_weights(spec, [":0", ":1", ":2", "0:1"])) == {
        ":0": F(5, 27), ":1": F(5, 27), ":2": F(7, 27), "0:1": F(10, 27)}
    assert weights_str(natural_weights(spec, [":0", ":1", ":2", "0:1", "0:2"])) == {
        ":0": F(1, 9), ":1": F(1, 6), ":2": F(1, 6), "0:1": F(5, 18), "0:2": F(5, 18)}
    for m in range(1, 6):
        p = natural_weights(spec, level_set(spec, m))
        assert all(w == F(1 if v.depth == 0 else 2, 3 ** (m + 1)) for v, w in p.items())


def test_float_mode_agrees():
    spec = builtin("sg")
    exact = natural_weights(spec, level_set(spec, 2))
    approx = natural_weights(spec, level_set(spec, 2), depth=4, exact=False)
    for v, w in exact.items():
        assert float(approx[v]) == pytest.approx(float(w), abs=1e-12)


def test_deeper_solve_keeps_weights():
    spec = builtin("sg3")
    assert natural_weights(spec, level_set(spec, 1)) == natural_weights(spec, level_set(spec, 1), depth=2)


def test_uniform_and_coefficient():
    spec = builtin("sg")
    nodes = [":0", ":1", ":2", "0:1", "0:2"]
    p = natural_weights(spec, nodes)
    w = uniform_weights(spec, nodes)
    assert sum(w.values()) == 1
    assert discrepancy_coefficient(p, w) == F(14, 45)
    assert discrepancy_coefficient(p, p) == 0


def test_energy_measure_weights():
    spec = builtin("sg")
    nu0 = en.EnergyMeasure(spec, en.self_basis(spec)[0]).normalized()
    p = natural_weights(spec, level_set(spec, 0), nu0)
    assert [p[VertexId((), n)] for n in range(3)] == [F(1, 2), F(1, 4), F(1, 4)]
    p = natural_weights(spec, level_set(spec, 0), en.EnergyMeasure.kusuoka(spec).normalized())
    assert set(p.values()) == {F(1, 3)}


@st.composite
def spline_case(draw):
    name = draw(st.sampled_from(BUILTINS))
    spec = builtin(name)
    depth = draw(st.integers(1, 2 if name != "interval" else 4))
    g = build_graph(spec, depth)
    inner = [v for x, v in enumerate(g.vertices) if x not in set(g.boundary())]
    extra = draw(st.lists(st.sampled_from(inner), max_size=5, unique=True))
    nodes = [g.vertices[x] for x in g.boundary()] + extra
    values = {v: F(draw(st.integers(-20, 20)), draw(st.integers(1, 9))) for v in nodes}
    return spec, nodes, values


@settings(max_examples=200, deadline=None)
@given(spline_case())
def test_natural_weights_integrate_splines_exactly(case):
    spec, nodes, values = case
    s = solve_spline(spec, nodes, values)
    assert integrate(values, natural_weights(spec, nodes)) == s.integral()


@settings(max_examples=30, deadline=None)
@given(spline_case())
def test_energy_measure_weights_integrate_splines_exactly(case):
    spec, nodes, values = case
    nu = en.EnergyMeasure.kusuoka(spec)
    s = solve_spline(spec, nodes, values)
    assert integrate(values, natural_weights(spec, nodes, nu)) == s.integral(nu)


# ---------------------------------------------------------------------------
# the error bounds dominate actual errors
# ---------------------------------------------------------------------------

def resistance_bound(spec):
    """R(x, q_0) <= D / (1 - max r): walk from q_0 to x through nested cells."""
    g0 = build_graph(spec, 0)
    d = float(effective_resistances(g0).max())
    return d / (1 - float(max(spec.r)))


def test_functions(spec, depth):
    """(name, V_depth samples, exact integral, exact energy or None, exact Laplacian L1 or None)."""
    g = build_graph(spec, depth)
    nb = spec.n_boundary
    h = [[cell_boundary_values(spec, [F(int(j == k)) for j in range(nb)], v.word)[v.index] for v in g.vertices]
         for k in range(nb)]
    iota = mh.product_integrals(spec)
    e = [[F(int(j == k)) for j in range(nb)] for k in range(nb)]
    g0 = build_graph(spec, 0)
    out = [("g_V0", list(g_v0_values(spec, depth)), g_v0_integral(spec), g_v0_integral(spec), F(1))]
    for k in range(nb):
        out.append((f"h{k}", h[k], sum(iota[k]), energy_form(g0, e[k]), F(0)))
    for k in range(nb):
        for kk in range(k, nb):
            # on the interval the products are quadratics with Laplacian of size 2
            lap = F(2) if spec.name == "interval" else None
            out.append((f"h{k}h{kk}", [a * b for a, b in zip(h[k], h[kk])], iota[k][kk],
                        en.product_energy(spec, e[k], e[kk]), lap))
    return out


test_functions.__test__ = False


@pytest.mark.parametrize("name", ["sg", "st", "sg3", "interval"])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_bounds_dominate_errors(name, m):
    spec = builtin(name)
    depth = {"sg": 6, "st": 4, "sg3": 3, "interval": 6}[name]
    if m >= depth:
        pytest.skip("node set deeper than the samples")
    g = build_graph(spec, depth)
    nodes = level_set(spec, m)
    p = natural_weights(spec, nodes)
    w = uniform_weights(spec, nodes)
    res = resistance_bound(spec)
    for fname, vals, exact, energy, lap in test_functions(spec, depth):
        sample = {v: vals[g.index[v]] for v in nodes}
        for weights, key in ((p, "natural"), (w, "general")):
            err = abs(float(integrate(sample, weights) - exact))
            b = error_budget(spec, nodes, weights, vals, depth, energy=energy, laplacian_l1=lap, resistance=res)
            e_bound = b.value(f"{key}_energy")
            assert err <= e_bound * (1 + 1e-9) + 1e-15, (fname, key)
            if f"{key}_laplacian" in b.bounds and lap is not None:
                assert err <= b.value(f"{key}_laplacian") * (1 + 1e-9) + 1e-15, (fname, key)


def test_green_function_attains_energy_bound():
    """For g_V0 with E = V_0 the energy bound is an equality."""
    spec = builtin("sg")
    nodes = level_set(spec, 0)
    b = error_budget(spec, nodes, energy=F(1, 18), laplacian_l1=F(1))
    assert b.value("natural_energy") == pytest.approx(1 / 18)
    assert b.value("natural_laplacian") == pytest.approx(1 / 15)
    assert not b.bounds["natural_energy"].estimated


def test_budget_needs_energy_or_samples():
    with pytest.raises(ValueError):
        error_budget(builtin("sg"), level_set(builtin("sg"), 0))


def test_resistance_term_symbolic_without_radius():
    spec = builtin("sg")
    nodes = level_set(spec, 1)
    b = error_budget(spec, nodes, uniform_weights(spec, nodes), energy=F(1))
    assert b.value("general_energy") is None
    assert any("resistance" in a for a in b.advisories)
    b.resistance = 1.0
    assert b.value("general_energy") == pytest.approx(math.sqrt(float(delta0_sq(spec, nodes))) + float(b.coefficient))


def test_delta1_used_in_laplacian_bound():
    spec = builtin("sg")
    nodes = level_set(spec, 1)
    b = error_budget(spec, nodes, energy=F(1), laplacian_l1=F(2))
    assert b.value("natural_laplacian") == pytest.approx(2 * float(delta1(spec, nodes).interval.upper))
