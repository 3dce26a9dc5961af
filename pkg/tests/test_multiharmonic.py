from fractions import Fraction

import pytest

from fraquad import multiharmonic as mh
from fraquad.fractal import build_graph, builtin
from fraquad.green import g_v0_values
from fraquad.harmonic import cell_boundary_values, vertex_masses
from fraquad.linalg import SparseFactor

F = Fraction


def galerkin_green(spec, m):
    """Oracle: L_m g = tent masses off V_0, g = 0 on V_0.

    Tent functions reproduce the Green's kernel at nodes, so the discrete
    solution agrees with the Green's function at every vertex of V_m.
    """
    g = build_graph(spec, m)
    bd = set(g.boundary())
    unknowns = [x for x in range(len(g)) if x not in bd]
    rows = {}
    for x in unknowns:
        row = {x: F(0)}
        for y, c in g.adjacency[x].items():
            row[x] += c
            if y not in bd:
                row[y] = -c
        rows[x] = row
    masses = vertex_masses(g)
    sol = SparseFactor(rows, unknowns).solve({x: masses[x] for x in unknowns})
    return [F(0) if x in bd else sol[x] for x in range(len(g))]


@pytest.mark.parametrize("name", ["sg", "st", "sg3", "interval"])
@pytest.mark.parametrize("method", ["green-identity", "f1k"])
def test_green_values_match_galerkin(name, method):
    spec = builtin(name)
    assert list(g_v0_values(spec, 2, method)) == galerkin_green(spec, 2)


def test_interval_green_is_parabola():
    spec = builtin("interval")
    g = build_graph(spec, 3)
    xs = [cell_boundary_values(spec, [F(0), F(1)], v.word)[v.index] for v in g.vertices]
    assert list(g_v0_values(spec, 3)) == [x * (1 - x) / 2 for x in xs]


def test_sg_first_level_values():
    for method in mh.G1_METHODS:
        vals = mh.g1_values(builtin("sg"), method)
        assert sorted(set(vals.values())) == [0, F(1, 15)]


@pytest.mark.parametrize("name", ["st", "sg3"])
def test_two_routes_agree(name):
    spec = builtin(name)
    assert mh.g1_from_f1k(spec) == mh.g1_green_identity(spec)


def test_st_and_sg3_first_level_values():
    st_vals = set(mh.g1_values(builtin("st")).values()) - {0}
    assert st_vals == {F(1, 24)}
    spec = builtin("sg3")
    vals = mh.g1_values(spec)
    g1 = build_graph(spec, 1)
    assert vals[g1.vertex((3,), 2)] == F(7, 90)
    assert vals[g1.vertex((0,), 1)] == F(7, 108)


def test_product_integrals():
    assert mh.product_integrals(builtin("sg"))[0][:2] == (F(7, 45), F(4, 45))
    st = mh.product_integrals(builtin("st"))
    assert (st[0][0], st[0][1]) == (F(7, 80), F(13, 240))
    sg3 = mh.product_integrals(builtin("sg3"))
    assert (sg3[0][0], sg3[0][1]) == (F(551, 3735), F(347, 3735))


@pytest.mark.parametrize("name", ["sg", "st", "sg3"])
def test_product_integrals_against_refinement(name):
    """Integrals of the vertex-wise product spline converge to the exact value."""
    spec = builtin(name)
    exact = mh.product_integrals(spec)
    m = 5 if name != "sg3" else 3
    g = build_graph(spec, m)
    masses = vertex_masses(g)
    nb = spec.n_boundary
    h = [[cell_boundary_values(spec, [F(int(j == k)) for j in range(nb)], v.word)[v.index] for v in g.vertices]
         for k in range(nb)]
    for k in range(nb):
        for kk in range(nb):
            approx = sum(float(mm) * float(a) * float(b) for mm, a, b in zip(masses, h[k], h[kk]))
            assert approx == pytest.approx(float(exact[k][kk]), abs=5e-3)


@pytest.mark.parametrize("name", ["sg", "st", "sg3"])
def test_product_integrals_sum_to_harmonic_integrals(name):
    spec = builtin(name)
    from fraquad.harmonic import harmonic_measure_integrals

    iota = harmonic_measure_integrals(spec)
    for k, row in enumerate(mh.product_integrals(spec)):
        assert sum(row) == iota[k]


def test_energy_and_green_matrices_are_inverse():
    from fraquad.linalg import identity, matmul

    for name in ["sg", "st", "sg3"]:
        spec = builtin(name)
        x = [list(r) for r in mh.energy_matrix(spec)]
        gm = [list(r) for r in mh.green_matrix(spec)]
        assert matmul(x, gm) == identity(len(x))
