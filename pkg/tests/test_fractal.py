import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fraquad.fractal import (
    SpecError,
    VertexId,
    build_graph,
    builtin,
    canonicalize,
    format_address,
    load_spec,
    nhedron,
    parse_address,
    spec_from_dict,
    spec_to_dict,
    validate_spec,
    words,
)

BUILTINS = ["sg", "st", "sg3", "interval"]


def union_find_vertices(spec, m):
    """Oracle: glue (w, n) corner labels directly and count classes."""
    reps = [(w, n) for w in words(spec.n_maps, m) for n in range(spec.n_boundary)]
    parent = {r: r for r in reps}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def pad(w, n):
        return w + (n,) * (m - len(w)), n

    for level in range(m):
        for u in words(spec.n_maps, level):
            for (i, a), (j, b) in spec.identifications:
                x, y = find(pad(u + (i,), a)), find(pad(u + (j,), b))
                parent[x] = y
    return len({find(r) for r in reps}), find


@pytest.mark.parametrize("name", BUILTINS)
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_vertex_count_matches_union_find(name, m):
    spec = builtin(name)
    count, _ = union_find_vertices(spec, m)
    assert len(build_graph(spec, m)) == count


def test_known_vertex_counts():
    for m in range(5):
        assert len(build_graph(builtin("sg"), m)) == (3 ** (m + 1) + 3) // 2
        assert len(build_graph(builtin("st"), m)) == 2 * 4 ** m + 2
        assert len(build_graph(builtin("interval"), m)) == 2 ** m + 1


@pytest.mark.parametrize("rep, canon", [
    (((1, 2), 0), "10:2"),
    (((1, 0), 1), "10:1"),
    (((1, 1), 2), "11:2"),
    (((2, 0), 2), "20:2"),
    (((2, 1), 2), "21:2"),
    (((0,), 0), ":0"),
    (((0, 0, 0), 0), ":0"),
    (((0, 0, 1), 1), "00:1"),
])
def test_sg_canonical_addresses(rep, canon):
    assert str(canonicalize(builtin("sg"), *rep)) == canon


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(BUILTINS), st.data())
def test_canonicalize_agrees_with_union_find(name, data):
    spec = builtin(name)
    m = 3
    w = tuple(data.draw(st.lists(st.integers(0, spec.n_maps - 1), min_size=m, max_size=m)))
    n = data.draw(st.integers(0, spec.n_boundary - 1))
    w2 = tuple(data.draw(st.lists(st.integers(0, spec.n_maps - 1), min_size=m, max_size=m)))
    n2 = data.draw(st.integers(0, spec.n_boundary - 1))
    _, find = union_find_vertices(spec, m)
    same = find((w, n)) == find((w2, n2))
    assert (canonicalize(spec, w, n) == canonicalize(spec, w2, n2)) == same


def test_lookup_accepts_padded_and_short_forms():
    g = build_graph(builtin("sg"), 3)
    assert g.lookup("0:1") == g.lookup("011:1") == g.lookup("10:0") == g.lookup(((1, 0, 0), 0))


def test_address_round_trip():
    assert parse_address(format_address((1, 2, 0), 2)) == ((1, 2, 0), 2)
    assert format_address((10, 3), 1) == "10.3:1"
    assert parse_address("10.3:1") == ((10, 3), 1)
    with pytest.raises(SpecError):
        parse_address("012")


def test_vertex_order_shortest_then_lexicographic():
    vs = build_graph(builtin("sg"), 2).vertices
    assert vs == sorted(vs)
    assert [str(v) for v in vs[:6]] == [":0", ":1", ":2", "0:1", "0:2", "1:2"]


@pytest.mark.parametrize("name", BUILTINS + ["nhedron:6"])
def test_builtins_validate(name):
    rep = validate_spec(builtin(name))
    assert rep.ok, rep.errors


def test_validator_rejects_bad_renormalization():
    d = spec_to_dict(builtin("sg"))
    d["r"] = ["1/2"] * 3
    rep = validate_spec(spec_from_dict(d))
    assert not rep.ok
    assert any("renormalization" in e for e in rep.errors)


def test_validator_rejects_bad_measure_and_gluing():
    d = spec_to_dict(builtin("sg"))
    d["mu"] = ["1/2", "1/2", "1/2"]
    assert not validate_spec(spec_from_dict(d)).ok
    d = spec_to_dict(builtin("sg"))
    d["identifications"] = [[[0, 1], [0, 2]]]
    assert not validate_spec(spec_from_dict(d)).ok


def test_spec_json_round_trip(tmp_path):
    spec = builtin("sg3")
    path = tmp_path / "sg3.json"
    path.write_text(json.dumps(spec_to_dict(spec)))
    back = load_spec(str(path))
    assert back == spec
    assert back.map_label(3) == "(01)"


def test_malformed_spec():
    with pytest.raises(SpecError):
        spec_from_dict({"n_maps": 3})
    with pytest.raises(SpecError):
        builtin("koch")


def test_nhedron_parameters():
    spec = nhedron(5)
    assert spec.r == (Fraction(5, 7),) * 5
    assert len(spec.pairs) == 10


def test_eta_counts_cells():
    g = build_graph(builtin("sg"), 2)
    assert sorted(set(g.eta)) == [1, 2]
    assert sum(g.eta) == 3 * 9
    assert g.eta[g.index[VertexId((), 0)]] == 1
