"""Reference manifest: published constants checked against exact computation.

Each item carries the printed value, the computed value for every
computation path, and a status derived from exact comparison:

- match: the printed value equals the computed one;
- paper-internal-conflict: they differ, and other printed data (tables,
  formulas, symmetry, mass conservation) independently reproduce the computed
  value or contradict the printed one;
- conjecture: the printed value was stated as a conjecture; the certified
  result is reported alongside;
- mismatch: anything else, including disagreement between computation paths.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import energy as en
from . import multiharmonic as mh
from .fractal import FractalSpec, VertexId, build_graph, builtin, canonicalize, parse_address
from .green import Interval, delta0_sq, delta1, g_v0_integral, g_v0_integral_series, g_v0_values, interpolant, level_set, pull_back
from .harmonic import extension_matrices, indicator_splines
from .quadrature import discrepancy_coefficient, natural_weights, uniform_weights
from .rational import fmt_rational

STATUSES = ("match", "mismatch", "paper-internal-conflict", "conjecture")
SCOPES = ("SG", "ST", "SG3", "interval", "nhedron", "all")
PATHS = ("green-identity", "f1k")


@dataclass
class VerificationItem:
    identifier: str
    scope: str
    expected: Any
    computed: Dict[str, Any]
    status: str
    source: str = "printed"
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "id": self.identifier,
            "scope": self.scope,
            "status": self.status,
            "source": self.source,
            "expected": render(self.expected),
            "computed": {k: render(v) for k, v in self.computed.items()},
            "note": self.note,
        }


@dataclass
class Evidence:
    """Printed data contradicting a printed value.

    `value` is what the other printed data imply; it must reproduce the
    computed value. When no value is implied, `holds` records a failed
    consistency check on the printed data alone.
    """

    description: str
    value: Any = None
    holds: Optional[bool] = None

    def supports(self, computed) -> bool:
        if self.value is not None:
            return self.value == computed
        return bool(self.holds)


def render(v) -> str:
    if isinstance(v, Fraction):
        return fmt_rational(v)
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, Interval):
        return f"[{fmt_rational(v.lower)}, {fmt_rational(v.upper)}]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {render(x)}" for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(render(x) for x in v) + "]"
    return str(v)


def common_ratio(expected, got) -> Optional[Fraction]:
    """got / expected when it is one number, entrywise for dicts over the nonzero entries."""
    if isinstance(got, (Fraction, int)) and isinstance(expected, (Fraction, int)):
        return Fraction(got) / expected if expected else None
    if isinstance(got, dict) and isinstance(expected, dict) and set(got) == set(expected):
        ratios = set()
        for k, e in expected.items():
            if not isinstance(e, (Fraction, int)) or not isinstance(got[k], (Fraction, int)):
                return None
            if e:
                ratios.add(Fraction(got[k]) / e)
            elif got[k]:
                return None
        return ratios.pop() if len(ratios) == 1 else None
    return None


def judge(expected, computed: Dict[str, Any], evidence: Optional[Evidence] = None, conjecture: bool = False) -> Tuple[str, str]:
    values = list(computed.values())
    if any(v != values[0] for v in values[1:]):
        return "mismatch", "computation paths disagree"
    got = values[0]
    if conjecture:
        if isinstance(got, Interval):
            how = "equals" if got.exact and got.lower == expected else ("contains" if got.contains(expected) else "excludes")
            return "conjecture", f"certified interval {render(got)} {how} the conjectured value"
        return "conjecture", "equals the conjectured value" if got == expected else "differs from the conjectured value"
    if isinstance(got, Interval):
        if got.exact:
            got = got.lower
        elif got.contains(expected):
            return "match", f"certified interval {render(got)} contains the printed value"
    if got == expected:
        return "match", ""
    if evidence is not None and evidence.supports(got):
        note = evidence.description
        ratio = common_ratio(expected, got)
        if ratio is not None:
            note += f"; computed/printed = {fmt_rational(ratio)}"
        return "paper-internal-conflict", note
    return "mismatch", "" if evidence is None else "stated evidence does not hold: " + evidence.description


class Manifest:
    def __init__(self):
        self.items: List[VerificationItem] = []

    def add(self, identifier: str, scope: str, expected, computed, evidence: Optional[Evidence] = None,
            conjecture: bool = False, source: str = "printed", note: str = "") -> VerificationItem:
        if not isinstance(computed, Paths):
            computed = {"exact": computed}
        status, why = judge(expected, computed, evidence, conjecture)
        text = "; ".join(x for x in (note, why) if x)
        item = VerificationItem(identifier, scope, expected, computed, status, source, text)
        self.items.append(item)
        return item


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def F(x) -> Fraction:
    return Fraction(x)


def table(rows: Sequence[Sequence[int]], den: int) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x, den) for x in r) for r in rows)


def frozen(m) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in r) for r in m)


def canon_key(spec: FractalSpec, addr: str) -> str:
    return str(canonicalize(spec, *parse_address(addr)))


def canon_dict(spec: FractalSpec, values: Dict[str, Any]) -> Dict[str, Any]:
    return {canon_key(spec, k): v for k, v in values.items()}


def sample(spline, spec: FractalSpec, addrs: Iterable[str]) -> Dict[str, Fraction]:
    return {canon_key(spec, a): spline(a) for a in addrs}


class Paths(dict):
    """Computed values keyed by computation path."""


def by_path(fn: Callable[[str], Any]) -> Paths:
    return Paths((p, fn(p)) for p in PATHS)


def relabel(spec: FractalSpec, m, sigma: Sequence[int]):
    """Matrix of the conjugate cell map under the boundary relabeling sigma."""
    pairs = spec.pairs
    pos = {p: n for n, p in enumerate(pairs)}

    def image(p):
        return pos[tuple(sorted((sigma[p[0]], sigma[p[1]])))]

    out = [[Fraction(0)] * len(pairs) for _ in pairs]
    for a, pa in enumerate(pairs):
        for b, pb in enumerate(pairs):
            out[image(pa)][image(pb)] = Fraction(m[a][b])
    return frozen(out)


def mass_conservation_defect(spec: FractalSpec, mats) -> List[Fraction]:
    """sum_i M_i applied to the total masses, minus the total masses."""
    masses = en.pair_masses(spec)
    n = len(spec.pairs)
    return [sum((m[p][q] * masses[q] for m in mats for q in range(n)), Fraction(0)) - masses[p] for p in range(n)]


def first_level_solution_from_tables(spec: FractalSpec, green_rows, order, integrals) -> List[Dict[str, Fraction]]:
    """Values on V_1 of the solutions of Delta f = h_k, from a Green matrix and product integrals.

    `order` lists the interior vertices of V_1 as (map, boundary index) pairs in
    the row order of `green_rows`.
    """
    g1 = build_graph(spec, 1)
    mats = extension_matrices(spec)
    idx = {g1.locate((i,), n): a for a, (i, n) in enumerate(order)}
    nb, nm = spec.n_boundary, spec.n_maps
    out = []
    for k in range(nb):
        vals = {}
        for x, v in enumerate(g1.vertices):
            if x not in idx:
                vals[str(v)] = Fraction(0)
                continue
            s = Fraction(0)
            for ii in range(nm):
                for nn in range(nb):
                    y = g1.locate((ii,), nn)
                    if y not in idx:
                        continue
                    gam = green_rows[idx[x]][idx[y]]
                    s -= spec.mu[ii] * gam * sum((integrals[kk][nn] * mats[ii][kk][k] for kk in range(nb)), Fraction(0))
            vals[str(v)] = s
        out.append(vals)
    return out


def permuted(matrix, perm: Sequence[int]):
    return tuple(tuple(matrix[a][b] for b in perm) for a in perm)


def interior_order(spec: FractalSpec, reps: Sequence[Tuple[int, int]]) -> List[int]:
    """Positions in interior_vertices of the vertices F_i q_n listed in `reps`."""
    g1 = build_graph(spec, 1)
    pos = {v: k for k, v in enumerate(mh.interior_vertices(spec))}
    return [pos[g1.vertex((i,), n)] for i, n in reps]


def weights_by_class(spec: FractalSpec, p: Dict[VertexId, Fraction], classify: Callable[[VertexId], Fraction]) -> Tuple[Dict, Dict]:
    expected = {str(v): classify(v) for v in p}
    return expected, {str(v): w for v, w in p.items()}


def uniform_discrepancy(spec: FractalSpec, nodes, p) -> Fraction:
    return discrepancy_coefficient(p, uniform_weights(spec, nodes))


def g1_at(spec: FractalSpec, method: str) -> Dict[str, Fraction]:
    return {str(v): x for v, x in mh.g1_values(spec, method).items()}


def self_consistent_integral(spec: FractalSpec, method: str) -> Fraction:
    """Closed-form integral of g, after checking it against the level-by-level series."""
    closed = g_v0_integral(spec, method)
    _, _, series = g_v0_integral_series(spec, 3, method)
    if closed != series:
        raise ArithmeticError(f"series and closed form disagree on the {method} path")
    return closed


# ---------------------------------------------------------------------------
# Sierpinski gasket
# ---------------------------------------------------------------------------

SG_V1 = (":0", ":1", ":2", "1:2", "0:2", "0:1")

SG_ONE_EXTRA = (":0", ":1", ":2", "0:1")
SG_ONE_EXTRA_INDICATORS = {
    ":0": (1, 0, 0, F("1/15"), F("4/15"), 0),
    ":1": (0, 1, 0, F("4/15"), F("1/15"), 0),
    ":2": (0, 0, 1, F("1/3"), F("1/3"), 0),
    "0:1": (0, 0, 0, F("1/3"), F("1/3"), 1),
}
SG_TWO_EXTRA = (":0", ":1", ":2", "0:1", "0:2")
SG_TWO_EXTRA_INDICATORS = {
    ":0": (1, 0, 0, 0, 0, 0),
    ":1": (0, 1, 0, F("1/4"), 0, 0),
    ":2": (0, 0, 1, F("1/4"), 0, 0),
    "0:1": (0, 0, 0, F("1/4"), 0, 1),
    "0:2": (0, 0, 0, F("1/4"), 1, 0),
}
SG_INNER = (":0", ":1", ":2", "01:2", "12:0", "20:1")

SG_M = (
    table([[6, 3, 0], [3, 6, 0], [-2, -2, 1]], 15),
    table([[6, 0, 3], [-2, 1, -2], [3, 0, 6]], 15),
    table([[-2, -2, 1], [0, 6, 3], [0, 3, 6]], 15),
)
SG_SELF_BASIS_M = (
    table([[9, 0, 0], [2, 2, -1], [2, -1, 2]], 15),
    table([[2, 2, -1], [0, 9, 0], [-1, 2, 2]], 15),
    table([[2, -1, 2], [-1, 2, 2], [0, 0, 9]], 15),
)


def harmonic_violations(spec: FractalSpec, nodes, values: Dict[str, Fraction]) -> List[str]:
    """Vertices off the node set where printed values break the discrete mean-value property.

    Only vertices whose neighbours all carry a printed value are checked.
    """
    values = canon_dict(spec, values)
    depth = max(parse_address(a)[0].__len__() for a in values)
    graph = build_graph(spec, depth)
    fixed = {canon_key(spec, a) for a in nodes}
    bad = []
    for x, v in enumerate(graph.vertices):
        key = str(v)
        nbrs = graph.adjacency[x]
        if key in fixed or key not in values or any(str(graph.vertices[y]) not in values for y in nbrs):
            continue
        flux = sum((c * (values[str(graph.vertices[y])] - values[key]) for y, c in nbrs.items()), Fraction(0))
        if flux:
            bad.append(key)
    return bad


def _indicator_item(man: Manifest, scope: str, ident: str, spec: FractalSpec, nodes, printed, positions, depth=None):
    splines = indicator_splines(spec, nodes, depth)
    expected, computed = {}, {}
    bad = []
    for node, vals in printed.items():
        key = canon_key(spec, node)
        spline = splines[canonicalize(spec, *parse_address(node))]
        for pos, val in zip(positions, vals):
            expected[f"{key}@{canon_key(spec, pos)}"] = F(val)
            computed[f"{key}@{canon_key(spec, pos)}"] = spline(pos)
        bad += [f"{key}@{b}" for b in harmonic_violations(spec, nodes, dict(zip(positions, map(F, vals))))]
    ev = Evidence(f"printed values break the mean-value property at {', '.join(bad)}", holds=bool(bad))
    man.add(ident, scope, expected, computed, evidence=ev)


def sg_items(man: Manifest) -> None:
    spec = builtin("sg")
    s = "SG"
    man.add("sg.first-level.green-values", s, {canon_key(spec, a): F("1/15") if a not in (":0", ":1", ":2") else F(0) for a in SG_V1},
            by_path(lambda p: canon_dict(spec, g1_at(spec, p))))
    f0 = {k: v for k, v in mh.f1k_values(spec)[0].items()}
    man.add("sg.first-level.solution-h0", s, canon_dict(spec, {":0": 0, ":1": 0, ":2": 0, "0:1": F("-9/375"), "0:2": F("-9/375"), "1:2": F("-7/375")}),
            {str(k): v for k, v in f0.items()})
    man.add("sg.v0.delta0_sq", s, F("1/18"), by_path(lambda p: delta0_sq(spec, SG_V1[:3], p)))
    man.add("sg.v0.delta1", s, F("1/15"), by_path(lambda p: delta1(spec, SG_V1[:3], 9, p).interval))
    man.add("sg.v0.weights", s, {str(VertexId((), n)): F("1/3") for n in range(3)},
            {str(v): w for v, w in natural_weights(spec, SG_V1[:3]).items()})

    # u = 15 g o F_0 on cells along the bottom edge
    exp, got = {}, {}
    for m in range(0, 5):
        vals = g_v0_values(spec, m + 1)
        graph = build_graph(spec, m + 1)
        for w in _words_over((1, 2), m):
            for n, target in enumerate((1 - Fraction(1, 5 ** m), F(1), F(1))):
                key = f"{''.join(map(str, w)) or '-'}:{n}"
                exp[key] = target
                got[key] = 15 * vals[graph.locate((0,) + w, n)]
    man.add("sg.bottom-edge-cells.corner-values", s, exp, got, note="depth <= 4")

    # one extra point
    man.add("sg.one-extra-point.difference-spline", s,
            canon_dict(spec, {":0": 0, ":1": 0, ":2": 0, "0:1": F("1/15"), "0:2": F("1/45"), "1:2": F("1/45")}),
            sample(interpolant(spec, SG_ONE_EXTRA), spec, SG_V1))
    man.add("sg.one-extra-point.difference-integral", s, F("2/81"), interpolant(spec, SG_ONE_EXTRA).integral())
    man.add("sg.one-extra-point.delta0_sq", s, F("5/162"), by_path(lambda p: delta0_sq(spec, SG_ONE_EXTRA, p)))
    _indicator_item(man, s, "sg.one-extra-point.indicators", spec, SG_ONE_EXTRA, SG_ONE_EXTRA_INDICATORS, SG_V1)
    p = natural_weights(spec, SG_ONE_EXTRA)
    man.add("sg.one-extra-point.weights", s, canon_dict(spec, {":0": F("5/27"), ":1": F("5/27"), ":2": F("7/27"), "0:1": F("10/27")}),
            {str(v): w for v, w in p.items()})
    man.add("sg.one-extra-point.uniform-discrepancy", s, F("7/27"), uniform_discrepancy(spec, SG_ONE_EXTRA, p))
    man.add("sg.one-extra-point.delta1", s, F("11/225"), by_path(lambda q: delta1(spec, SG_ONE_EXTRA, 9, q).interval), conjecture=True)

    # two extra points
    man.add("sg.two-extra-points.difference-spline", s,
            canon_dict(spec, {":0": 0, ":1": 0, ":2": 0, "0:1": F("1/15"), "0:2": F("1/15"), "1:2": F("1/30")}),
            sample(interpolant(spec, SG_TWO_EXTRA), spec, SG_V1))
    man.add("sg.two-extra-points.difference-integral", s, F("1/27"), interpolant(spec, SG_TWO_EXTRA).integral())
    man.add("sg.two-extra-points.delta0_sq", s, F("1/54"), by_path(lambda q: delta0_sq(spec, SG_TWO_EXTRA, q)))
    _indicator_item(man, s, "sg.two-extra-points.indicators", spec, SG_TWO_EXTRA, SG_TWO_EXTRA_INDICATORS, SG_V1)
    p = natural_weights(spec, SG_TWO_EXTRA)
    man.add("sg.two-extra-points.weights", s,
            canon_dict(spec, {":0": F("1/9"), ":1": F("1/6"), ":2": F("1/6"), "0:1": F("5/18"), "0:2": F("5/18")}),
            {str(v): w for v, w in p.items()})
    man.add("sg.two-extra-points.uniform-discrepancy", s, F("14/45"), uniform_discrepancy(spec, SG_TWO_EXTRA, p))
    man.add("sg.two-extra-points.delta1", s, F("1/30"), by_path(lambda q: delta1(spec, SG_TWO_EXTRA, 9, q).interval), conjecture=True)

    # level sets
    for m in range(1, 5):
        man.add(f"sg.level-set-{m}.delta0_sq", s, Fraction(1, 18 * 5 ** m), delta0_sq(spec, level_set(spec, m)))
    for m in range(1, 4):
        man.add(f"sg.level-set-{m}.delta1", s, Fraction(1, 15 * 5 ** m), delta1(spec, level_set(spec, m), 9 + m).interval)
    for m in range(1, 6):
        nodes = level_set(spec, m)
        p = natural_weights(spec, nodes)
        exp = {str(v): Fraction(1 if v.depth == 0 else 2, 3 ** (m + 1)) for v in nodes}
        man.add(f"sg.level-set-{m}.weights", s, exp, {str(v): w for v, w in p.items()})
        man.add(f"sg.level-set-{m}.uniform-discrepancy", s, Fraction(2 * (3 ** m - 1), 3 ** m * (3 ** m + 1)),
                uniform_discrepancy(spec, nodes, p))

    # sets between V_1 and V_2, by the type of their pulled-back pieces
    base = list(level_set(spec, 1))
    extra_sets = {
        "one-cell-four-points": ["00:1"],
        "one-cell-five-points": ["00:1", "00:2"],
        "one-cell-full": ["00:1", "00:2", "01:2"],
        "mixed": ["00:1", "10:2", "11:2", "20:1", "20:2", "21:2"],
        "all-full": [str(v) for v in level_set(spec, 2)],
    }
    table_sq = {3: F("1/18"), 4: F("5/162"), 5: F("1/54"), 6: F("1/90")}
    table_sup = {3: F("1/15"), 4: F("11/225"), 5: F("1/30"), 6: F("1/75")}
    for name, extra in extra_sets.items():
        nodes = base + extra
        parts = pull_back(spec, nodes, 1)
        counts = [len(e) for e in parts.values()]
        formula_sq = sum((table_sq[c] for c in counts), Fraction(0)) / 15
        formula_sup = max(table_sup[c] for c in counts) / 5
        man.add(f"sg.between-levels.{name}.delta0_sq", s, formula_sq, delta0_sq(spec, nodes))
        man.add(f"sg.between-levels.{name}.delta1", s, formula_sup, delta1(spec, nodes, 10).interval,
                conjecture=any(c in (4, 5) for c in counts) and min(counts) > 3,
                note="printed formula uses the conjectured values for four- and five-point pieces" if any(c in (4, 5) for c in counts) else "")

    # interior triangle
    man.add("sg.interior-triangle.delta0_sq", s, F("1/90"), by_path(lambda q: delta0_sq(spec, SG_INNER, q)))
    man.add("sg.interior-triangle.delta1", s, F("1/75"), by_path(lambda q: delta1(spec, SG_INNER, 9, q).interval))
    p = natural_weights(spec, SG_INNER)
    man.add("sg.interior-triangle.weights", s, {canon_key(spec, a): F("1/9") if a.startswith(":") else F("2/9") for a in SG_INNER},
            {str(v): w for v, w in p.items()})
    man.add("sg.interior-triangle.uniform-discrepancy", s, F("1/3"), uniform_discrepancy(spec, SG_INNER, p))
    v2 = level_set(spec, 2)
    inner = {canon_key(spec, a) for a in SG_INNER}
    exp = {}
    for v in v2:
        k = str(v)
        exp[k] = F(0) if v.depth == 0 else F("4/75") if v.depth == 1 else F("1/15") if k in inner else F("1/25")
    man.add("sg.interior-triangle.difference-spline", s, exp, {str(v): interpolant(spec, SG_INNER)(v) for v in v2})
    pos = (":0", ":1", ":2", "1:2", "0:1", "0:2", "00:1", "00:2", "10:1", "20:2", "11:2", "21:2", "01:2", "12:0", "20:1")
    printed = {
        ":0": (1, 0, 0, F("1/265"), F("26/265"), F("26/265"), F("97/265"), F("97/265"), F("7/265"), F("7/265"), F("2/265"), F("2/265"), 0, 0, 0),
        "01:2": (0, 0, 0, F("4/265"), F("104/265"), F("104/265"), F("123/265"), F("123/265"), F("8/265"), F("8/265"), F("28/265"), F("28/265"), 1, 0, 0),
    }
    _indicator_item(man, s, "sg.interior-triangle.indicators", spec, SG_INNER, printed, pos)
    v1 = level_set(spec, 1)
    man.add("sg.interior-triangle.same-as-level-one", s,
            (delta0_sq(spec, v1), delta1(spec, v1, 10).interval.lower, uniform_discrepancy(spec, v1, natural_weights(spec, v1))),
            (delta0_sq(spec, SG_INNER), delta1(spec, SG_INNER, 9).interval.lower, uniform_discrepancy(spec, SG_INNER, p)),
            source="derived")

    # the interior triangle replicated in every m-cell
    for m in range(1, 4):
        nodes = _replicated(spec, SG_INNER, m)
        man.add(f"sg.replicated-triangle-{m}.delta0_sq", s, Fraction(1, 18 * 5 ** (m + 1)), delta0_sq(spec, nodes))
        if m <= 2:
            man.add(f"sg.replicated-triangle-{m}.delta1", s, Fraction(1, 15 * 5 ** (m + 1)), delta1(spec, nodes, 11).interval)
        pw = natural_weights(spec, nodes)
        exp = {str(v): Fraction(1 if v.depth == 0 else 2, 9 * 3 ** m) for v in pw}
        man.add(f"sg.replicated-triangle-{m}.weights", s, exp, {str(v): w for v, w in pw.items()})
        got = uniform_discrepancy(spec, nodes, pw)
        k = m + 1
        man.add(f"sg.replicated-triangle-{m}.uniform-discrepancy", s, Fraction(2 * (3 ** m - 1), 3 ** m + 1), got,
                evidence=Evidence("the printed claim equates it with the level-set value at m+1, and the printed "
                                  "level-set formula there gives the computed value",
                                  value=Fraction(2 * (3 ** k - 1), 3 ** k * (3 ** k + 1))))

    _energy_items(man, s, spec, SG_M, symmetry=(2, (2, 1, 0)))
    man.add("sg.energy.self-basis-matrices", s, SG_SELF_BASIS_M, tuple(frozen(m) for m in en.self_basis_matrices(spec)))
    exp = [[F("-1/2"), F("-1/2"), F("1/2")], [F("-1/2"), F("1/2"), F("-1/2")], [F("1/2"), F("-1/2"), F("-1/2")]]
    got = [en.basis_convert(spec, en.decompose_pair(spec, _unit(3, a), _unit(3, b)), "jk->i") for a, b in spec.pairs]
    man.add("sg.energy.pair-in-self-basis", s, frozen(exp), frozen(got))
    _basic_items(man, s, spec, F(1), F("1/2"))


def _unit(n: int, k: int) -> List[Fraction]:
    return [Fraction(int(i == k)) for i in range(n)]


def _words_over(letters, m):
    import itertools
    return itertools.product(letters, repeat=m)


def _replicated(spec: FractalSpec, nodes: Sequence[str], m: int) -> List[Tuple[Tuple[int, ...], int]]:
    out = []
    for w in _words_over(range(spec.n_maps), m):
        for a in nodes:
            word, n = parse_address(a)
            out.append((tuple(w) + word, n))
    return out


def _energy_items(man: Manifest, scope: str, spec: FractalSpec, printed, symmetry=None, conservation=False) -> None:
    """Compare printed cell matrices with computed ones.

    symmetry = (target map, relabeling): a misprint in the target is certified
    when the relabeled printed first matrix reproduces the computed one.
    conservation: misprints are certified by a mass-conservation defect of the
    printed tables.
    """
    computed = [frozen(m) for m in en.energy_matrices(spec)]
    prefix = spec.name.lower()
    defect = mass_conservation_defect(spec, printed)
    for i, (p, c) in enumerate(zip(printed, computed)):
        ev = None
        if symmetry is not None and symmetry[0] == i:
            ev = Evidence(f"relabeling the printed matrix of map 0 by {list(symmetry[1])} gives a different matrix "
                          f"for map {i}", value=relabel(spec, printed[0], symmetry[1]))
        if conservation:
            ev = Evidence("printed tables violate mass conservation: sum_i M_i applied to the total masses "
                          f"minus the masses = {render(defect)}; computed defect {render(mass_conservation_defect(spec, computed))}",
                          holds=any(defect) and not any(mass_conservation_defect(spec, computed)))
        man.add(f"{prefix}.energy.cell-matrix-{spec.map_label(i)}", scope, p, c, evidence=ev)


def _basic_items(man: Manifest, scope: str, spec: FractalSpec, diag: Fraction, off: Fraction) -> None:
    prefix = spec.name.lower()
    nb = spec.n_boundary
    exp = tuple(tuple(F("-1/2") if i in (j, k) else F(0) for j, k in spec.pairs) for i in range(nb))
    man.add(f"{prefix}.energy.basic-integrals", scope, exp, en.basic_integrals(spec))
    exp = tuple(tuple(diag if i == j else off for j in range(nb)) for i in range(nb))
    man.add(f"{prefix}.energy.self-measure-integrals", scope, exp, en.d_table(spec))


# ---------------------------------------------------------------------------
# Sierpinski tetrahedron
# ---------------------------------------------------------------------------

ST_A = [
    [48, 16, 16, 16, 16, 6, 5, 5, 16, 5, 6, 5, 16, 5, 5, 6],
    [8, 32, 12, 12, 2, 8, 3, 3, 3, 12, 5, 4, 3, 12, 4, 5],
    [8, 12, 32, 12, 3, 5, 12, 4, 2, 3, 8, 3, 3, 4, 12, 5],
    [8, 12, 12, 32, 3, 5, 4, 12, 3, 4, 5, 12, 2, 3, 3, 8],
    [8, 2, 3, 3, 32, 8, 12, 12, 12, 3, 5, 4, 12, 3, 4, 5],
    [6, 16, 5, 5, 16, 48, 16, 16, 5, 16, 6, 5, 5, 16, 5, 6],
    [5, 3, 12, 4, 12, 8, 32, 12, 3, 2, 8, 3, 4, 3, 12, 5],
    [5, 3, 4, 12, 12, 8, 12, 32, 4, 3, 5, 12, 3, 2, 3, 8],
    [8, 3, 2, 3, 12, 5, 3, 4, 32, 12, 8, 12, 12, 4, 3, 5],
    [5, 12, 3, 4, 3, 8, 2, 3, 12, 32, 8, 12, 4, 12, 3, 5],
    [6, 5, 16, 5, 5, 6, 16, 5, 16, 16, 48, 16, 5, 5, 16, 6],
    [5, 4, 3, 12, 4, 5, 3, 12, 12, 12, 8, 32, 3, 3, 2, 8],
    [8, 3, 3, 2, 12, 5, 4, 3, 12, 4, 5, 3, 32, 12, 12, 8],
    [5, 12, 4, 3, 3, 8, 3, 2, 4, 12, 5, 3, 12, 32, 12, 8],
    [5, 4, 12, 3, 4, 5, 12, 3, 3, 3, 8, 2, 12, 12, 32, 8],
    [6, 5, 5, 16, 5, 6, 5, 16, 5, 5, 6, 16, 16, 16, 16, 48],
]
ST_X_ORDER = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
ST_X = [
    [18, -3, -3, -3, -3, 0], [-3, 18, -3, -3, 0, -3], [-3, -3, 18, 0, -3, -3],
    [-3, -3, 0, 18, -3, -3], [-3, 0, -3, -3, 18, -3], [0, -3, -3, -3, -3, 18],
]
ST_G = [
    [10, 3, 3, 3, 3, 2], [3, 10, 3, 3, 2, 3], [3, 3, 10, 2, 3, 3],
    [3, 3, 2, 10, 3, 3], [3, 2, 3, 3, 10, 3], [2, 3, 3, 3, 3, 10],
]
ST_M = (
    table([[8, 4, 4, 0, 0, 0], [4, 8, 4, 0, 0, 0], [4, 4, 8, 0, 0, 0],
           [-2, -2, -1, 1, 0, 0], [-2, -1, -2, 0, 1, 0], [-1, -2, -2, 0, 0, 1]], 24),
    table([[8, 0, 0, 4, 4, 0], [-2, 1, 0, -2, -1, 0], [-2, 0, 1, -1, -2, 0],
           [4, 0, 0, 8, 4, 0], [4, 0, 0, 4, 8, 0], [-1, 0, 0, -2, -2, 1]], 24),
    table([[1, -2, 0, -2, 0, 1], [0, 8, 0, 4, 0, 4], [0, -2, 1, -1, 0, -2],
           [0, -2, 1, -1, 0, -2], [0, 4, 0, 8, 0, 4], [0, 4, 0, 4, 0, 8]], 24),
    table([[1, 0, -2, 0, -2, -1], [0, 1, -2, 0, -1, -2], [0, 0, 8, 0, 4, 4],
           [0, 0, -1, 1, -2, -2], [0, 0, 4, 0, 8, 4], [0, 0, 4, 0, 4, 8]], 24),
)


def _first_level_items(man: Manifest, scope: str, spec: FractalSpec, a_rows, a_den, i_diag, i_off, x_order, x_rows, x_den, g_rows, g_den):
    prefix = spec.name.lower()
    man.add(f"{prefix}.first-level.product-matrix", scope, table(a_rows, a_den), mh.product_matrix(spec),
            note="rows and columns in lexicographic pair order")
    nb = spec.n_boundary
    man.add(f"{prefix}.first-level.product-integrals", scope,
            tuple(tuple(i_diag if k == kk else i_off for kk in range(nb)) for k in range(nb)), mh.product_integrals(spec))
    perm = interior_order(spec, x_order)
    man.add(f"{prefix}.first-level.energy-matrix", scope, table(x_rows, x_den), permuted(mh.energy_matrix(spec), perm))
    man.add(f"{prefix}.first-level.green-matrix", scope, table(g_rows, g_den), permuted(mh.green_matrix(spec), perm))


def st_items(man: Manifest) -> None:
    spec = builtin("st")
    s = "ST"
    _first_level_items(man, s, spec, ST_A, 144, F("7/80"), F("13/240"), ST_X_ORDER, ST_X, 2, ST_G, 72)
    g1 = build_graph(spec, 1)
    exp, got = {}, {}
    fs = mh.f1k_values(spec)
    for j in range(4):
        for i in range(4):
            for k in range(4):
                v = g1.vertex((i,), k)
                val = F(0) if i == k else F("-5/432") if j in (i, k) else F("-4/432")
                exp[f"{j}@{v}"] = val
                got[f"{j}@{v}"] = fs[j][v]
    man.add("st.first-level.solutions-hj", s, exp, got)

    table_g = {str(v): F(0) if v.depth == 0 else -sum((exp[f"{j}@{v}"] for j in range(4)), F(0)) for v in g1.vertices}
    printed_g = {str(v): F(0) if v.depth == 0 else F("1/16") for v in g1.vertices}
    man.add("st.first-level.green-values", s, printed_g, by_path(lambda p: g1_at(spec, p)),
            evidence=Evidence("minus the sum of the printed solution table gives the computed values", value=table_g))
    implied = F("1/24")
    man.add("st.v0.integral-of-green", s, F("9/160"), by_path(lambda p: self_consistent_integral(spec, p)),
            evidence=Evidence("the printed series with the first-level value implied by the printed solution table",
                              value=Fraction(3, 4) * implied * Fraction(6, 5)))
    man.add("st.v0.delta1", s, F("1/16"), by_path(lambda p: delta1(spec, [":0", ":1", ":2", ":3"], 9, p).interval),
            evidence=Evidence("the printed argument locates the supremum at the first-level value, which the printed "
                              "solution table fixes at 1/24", value=implied))
    p = natural_weights(spec, [":0", ":1", ":2", ":3"])
    man.add("st.v0.weights", s, {str(v): F("1/3") for v in p}, {str(v): w for v, w in p.items()},
            evidence=Evidence("four weights of 1/3 cannot integrate constants; the printed level-set formula at m=0 "
                              "gives 1/4", value={str(v): F("1/4") for v in p}))
    for m in range(1, 4):
        nodes = level_set(spec, m)
        pw = natural_weights(spec, nodes)
        man.add(f"st.level-set-{m}.weights", s, {str(v): Fraction(1 if v.depth == 0 else 2, 4 ** (m + 1)) for v in nodes},
                {str(v): w for v, w in pw.items()})
        got = uniform_discrepancy(spec, nodes, pw)
        printed_w = {v: Fraction(1 if v.depth == 0 else 2, 4 ** (m + 1)) for v in nodes}
        man.add(f"st.level-set-{m}.uniform-discrepancy", s, Fraction(3 * (4 ** m - 1), 4 ** m * (4 ** m + 1)), got,
                evidence=Evidence("summing |p - w| over the printed weights",
                                  value=discrepancy_coefficient(printed_w, uniform_weights(spec, nodes))))
        if m <= 2:
            man.add(f"st.level-set-{m}.delta0_sq", s, Fraction(9, 160 * 6 ** m), delta0_sq(spec, nodes),
                    evidence=Evidence("printed scaling applied to the value implied by the printed solution table",
                                      value=Fraction(3, 80 * 6 ** m)))
            man.add(f"st.level-set-{m}.delta1", s, Fraction(1, 16 * 6 ** m), delta1(spec, nodes, 9 + m).interval,
                    evidence=Evidence("printed scaling applied to the value implied by the printed solution table",
                                      value=Fraction(1, 24 * 6 ** m)))
    _energy_items(man, s, spec, ST_M, symmetry=(2, (2, 1, 0, 3)))
    _basic_items(man, s, spec, F("3/2"), F("1/2"))


# ---------------------------------------------------------------------------
# three-level gasket
# ---------------------------------------------------------------------------

SG3_A = [
    [410, 219, 219, 219, 123, 113, 219, 113, 123],
    [125, 280, 161, 55, 125, 71, 71, 161, 97],
    [125, 161, 280, 71, 97, 161, 55, 71, 125],
    [125, 55, 71, 280, 125, 161, 161, 71, 97],
    [123, 219, 113, 219, 410, 219, 113, 219, 123],
    [97, 71, 161, 161, 125, 280, 71, 55, 125],
    [125, 71, 55, 161, 97, 71, 280, 161, 125],
    [97, 161, 71, 71, 125, 55, 161, 280, 125],
    [123, 113, 219, 113, 123, 219, 219, 219, 410],
]
SG3_X_ORDER = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (3, 2)]
SG3_X = [
    [60, -15, -15, 0, 0, 0, -15], [-15, 60, 0, 0, -15, 0, -15], [-15, 0, 60, -15, 0, 0, -15],
    [0, 0, -15, 60, 0, -15, -15], [0, -15, 0, 0, 60, -15, -15], [0, 0, 0, -15, -15, 60, -15],
    [-15, -15, -15, -15, -15, -15, 90],
]
SG3_G = [
    [469, 203, 203, 133, 133, 119, 210], [203, 469, 133, 119, 203, 133, 210],
    [203, 133, 469, 203, 119, 133, 210], [133, 119, 203, 469, 133, 203, 210],
    [133, 203, 119, 133, 469, 203, 210], [119, 133, 133, 203, 203, 469, 210],
    [210, 210, 210, 210, 210, 210, 420],
]
SG3_M = (
    table([[28, 7, 0], [7, 28, 0], [-12, -12, 1]], 105),
    table([[28, 0, 7], [-12, 1, -12], [7, 0, 28]], 105),
    table([[1, -12, -12], [0, 28, 7], [0, 7, 28]], 105),
    table([[16, 3, 3], [0, 6, -2], [0, -2, 6]], 105),
    table([[6, 0, -2], [3, 16, 3], [-2, 0, 6]], 105),
    table([[6, -2, 0], [-2, 6, 0], [3, 3, 16]], 105),
)
SG3_V1_H0 = {":0": 1, "0:1": F("8/15"), "0:2": F("8/15"), "1:0": F("4/15"), "3:2": F("1/3"), "2:0": F("4/15"),
             ":1": 0, "1:2": F("3/15"), "2:1": F("3/15"), ":2": 0}
SG3_F10 = {":0": 0, "0:1": F("-431/20250"), "0:2": F("-431/20250"), "1:0": F("-121/6750"), "2:0": F("-121/6750"),
           "1:2": F("-331/20250"), "2:1": F("-331/20250"), "3:2": F("-1/45"), ":1": 0, ":2": 0}


def _printed_recursion_corners(ratio: Fraction, side: Fraction, center: Fraction) -> List[Fraction]:
    """Corners of the cell (01)2 from the printed refinement rule with the printed first-level constants."""
    a, b, c = side, side, center          # corners of the cell (01): F_0 q_1, F_1 q_0, centre
    return [
        (4 * a + 3 * b + 8 * c) / 15 + ratio * side,     # F_(01) F_2 q_0
        (3 * a + 4 * b + 8 * c) / 15 + ratio * side,     # F_(01) F_2 q_1
        c,                                               # F_(01) F_2 q_2 = F_(01) q_2
    ]


def sg3_items(man: Manifest) -> None:
    spec = builtin("sg3")
    s = "SG3"
    g1 = build_graph(spec, 1)
    h0 = extension_matrices(spec)
    man.add("sg3.first-level.harmonic-h0", s, canon_dict(spec, SG3_V1_H0),
            {str(v): Fraction(int(v == VertexId((), 0))) if v.depth == 0 else h0[v.word[0]][v.index][0] for v in g1.vertices})
    _first_level_items(man, s, spec, SG3_A, 1350, F("551/3735"), F("347/3735"), SG3_X_ORDER, SG3_X, 7, SG3_G, 2700)

    printed_g = table(SG3_G, 2700)
    printed_i = tuple(tuple(F("551/3735") if k == kk else F("347/3735") for kk in range(3)) for k in range(3))
    from_tables = first_level_solution_from_tables(spec, printed_g, SG3_X_ORDER, printed_i)
    man.add("sg3.first-level.solution-h0", s, canon_dict(spec, SG3_F10), {str(k): v for k, v in mh.f1k_values(spec)[0].items()},
            evidence=Evidence("the printed solution formula evaluated on the printed Green matrix and product integrals "
                              "reproduces the computed values", value=from_tables[0]))
    g_tables = {k: -sum((f[k] for f in from_tables), F(0)) for k in from_tables[0]}
    printed_vals = {str(v): F(0) if v.depth == 0 else F("1/15") if v == g1.vertex((3,), 2) else F("1/18") for v in g1.vertices}
    man.add("sg3.first-level.green-values", s, printed_vals, by_path(lambda p: g1_at(spec, p)),
            evidence=Evidence("minus the sum of the solutions evaluated on the printed tables", value=g_tables))
    side = g_tables[str(g1.vertex((0,), 1))]
    center = g_tables[str(g1.vertex((3,), 2))]
    implied_integral = (12 * side + 3 * center) / 18 / (1 - F("7/90"))
    man.add("sg3.v0.integral-of-green", s, F("13/249"), by_path(lambda p: self_consistent_integral(spec, p)),
            evidence=Evidence("the printed series with first-level values from the printed tables", value=implied_integral))
    corners = _printed_recursion_corners(F("7/90"), F("1/18"), F("1/15"))
    v0 = [":0", ":1", ":2"]
    man.add("sg3.v0.delta1", s, F("540/8051"), by_path(lambda p: delta1(spec, v0, 9, p).interval),
            evidence=Evidence("the printed argument needs the corners of cell (01)2 all equal to the centre value; the "
                              f"printed refinement rule with the printed constants gives {render(corners)}",
                              holds=len(set(corners)) > 1))
    p = natural_weights(spec, v0)
    man.add("sg3.v0.weights", s, {str(v): F("1/3") for v in p}, {str(v): w for v, w in p.items()})
    for m in range(1, 3):
        nodes = level_set(spec, m)
        man.add(f"sg3.level-set-{m}.delta0_sq", s, F("7/90") ** m * F("13/249") ** 2, delta0_sq(spec, nodes),
                evidence=Evidence("at m=0 the printed formula squared gives (13/249)^2, not the printed 13/249",
                                  holds=F("13/249") ** 2 != F("13/249")))
        man.add(f"sg3.level-set-{m}.delta0_sq-scaling", s, F("7/90") ** m * delta0_sq(spec, v0), delta0_sq(spec, nodes), source="derived")
    man.add("sg3.level-set-1.delta1", s, F("7/90") * F("540/8051"), delta1(spec, level_set(spec, 1), 10).interval,
            evidence=Evidence("scales the value of the false ridge argument", holds=len(set(corners)) > 1))
    for m in range(1, 6):
        graph = build_graph(spec, m)
        eta = _eta(graph)
        man.add(f"sg3.level-set-{m}.eta-counts", s,
                (3, Fraction(6, 5) * (6 ** m - 1), Fraction(1, 5) * (6 ** m - 1)),
                tuple(Fraction(sum(1 for e in eta if e == k)) for k in (1, 2, 3)))
    for m in range(1, 5):
        nodes = level_set(spec, m)
        pw = natural_weights(spec, nodes)
        graph = build_graph(spec, m)
        eta = _eta(graph)
        exp = {str(v): Fraction(eta[x], 3 * 6 ** m) for x, v in enumerate(graph.vertices)}
        man.add(f"sg3.level-set-{m}.weights", s, exp, {str(v): w for v, w in pw.items()})
        n = 6 ** m
        printed = F("4/15") if m == 1 else Fraction(4, 5) * Fraction((n - 1) * (n + 4), n * (7 * n + 8))
        man.add(f"sg3.level-set-{m}.uniform-discrepancy", s, printed, uniform_discrepancy(spec, nodes, pw))
    _energy_items(man, s, spec, SG3_M, conservation=True)
    _basic_items(man, s, spec, F(1), F("1/2"))


def _eta(graph) -> List[int]:
    """Number of top-level cells of the graph containing each vertex."""
    eta = [0] * len(graph)
    for corners in graph.cells.values():
        for x in set(corners):
            eta[x] += 1
    return eta


# ---------------------------------------------------------------------------
# interval and n-hedra
# ---------------------------------------------------------------------------

def interval_items(man: Manifest) -> None:
    spec = builtin("interval")
    s = "interval"
    _energy_items(man, s, spec, (table([[1]], 2), table([[1]], 2)))
    _basic_items(man, s, spec, F("1/2"), F("1/2"))


def nhedron_items(man: Manifest, sizes: Iterable[int] = range(3, 11)) -> None:
    s = "nhedron"
    for n in sizes:
        spec = builtin(f"nhedron:{n}")
        man.add(f"nhedron-{n}.energy.cell-matrices", s, tuple(frozen(m) for m in en.xi_matrices(n)),
                tuple(frozen(m) for m in en.energy_matrices(spec)))
        nb = spec.n_boundary
        exp = tuple(tuple(F("-1/2") if i in (j, k) else F(0) for j, k in spec.pairs) for i in range(nb))
        man.add(f"nhedron-{n}.energy.basic-integrals", s, exp, en.basic_integrals(spec))
        exp = tuple(tuple(Fraction(n - 1, 2) if i == j else F("1/2") for j in range(nb)) for i in range(nb))
        man.add(f"nhedron-{n}.energy.self-measure-integrals", s, exp, en.d_table(spec))


BUILDERS = {"SG": sg_items, "ST": st_items, "SG3": sg3_items, "interval": interval_items, "nhedron": nhedron_items}


@dataclass
class VerificationReport:
    scope: str
    items: List[VerificationItem]
    seconds: float = 0.0
    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(it.status == "mismatch" for it in self.items)

    def as_dict(self) -> dict:
        return {
            "scope": self.scope,
            "ok": self.ok,
            "counts": self.counts,
            "items": [it.as_dict() for it in self.items],
        }


def run(scope: str = "all") -> VerificationReport:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; choose from {', '.join(SCOPES)}")
    start = time.perf_counter()
    man = Manifest()
    for name, build in BUILDERS.items():
        if scope in ("all", name):
            build(man)
    counts = {st: sum(1 for it in man.items if it.status == st) for st in STATUSES}
    return VerificationReport(scope, man.items, time.perf_counter() - start, counts)


def conflict_report(report: VerificationReport) -> List[str]:
    """One line per conflicted item: printed value, computed paths and the evidence."""
    lines = []
    for it in report.items:
        if it.status != "paper-internal-conflict":
            continue
        paths = ", ".join(f"{k}={render(v)}" for k, v in it.computed.items())
        lines.append(f"{it.identifier}: printed {render(it.expected)}; computed {paths}; {it.note}")
    return lines
