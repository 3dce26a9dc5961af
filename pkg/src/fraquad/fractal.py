"""Self-similar fractal specifications, vertex addressing and the graphs Gamma_m.

A vertex of V_m is the image F_w q_n of a boundary point under a word w of
length at most m. Many words name the same point; every vertex is stored
under a canonical address, the shortest word (then lexicographically least)
among all of its representations.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .rational import fmt_rational, parse_rational

Word = Tuple[int, ...]
Rep = Tuple[Word, int]


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class Embedding:
    """Planar coordinates used only for plotting.

    `maps[i]` is (a, b, c, d, e, f) for x -> (a x + b y + e, c x + d y + f).
    """

    points: Tuple[Tuple[float, float], ...]
    maps: Tuple[Tuple[float, float, float, float, float, float], ...]

    def apply(self, word: Word, pt: Tuple[float, float]) -> Tuple[float, float]:
        x, y = pt
        for i in reversed(word):
            a, b, c, d, e, f = self.maps[i]
            x, y = a * x + b * y + e, c * x + d * y + f
        return x, y


@dataclass(frozen=True)
class FractalSpec:
    name: str
    n_maps: int
    n_boundary: int
    r: Tuple[Fraction, ...]
    mu: Tuple[Fraction, ...]
    conductances: Tuple[Tuple[int, int, Fraction], ...]
    identifications: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]
    embedding: Optional[Embedding] = field(default=None, compare=False)
    labels: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def conductance(self, j: int, k: int) -> Fraction:
        if j > k:
            j, k = k, j
        return sum((c for a, b, c in self.conductances if (a, b) == (j, k)), Fraction(0))

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        n = self.n_boundary
        return [(j, k) for j in range(n) for k in range(j + 1, n)]

    def map_label(self, i: int) -> str:
        if self.labels and i < len(self.labels):
            return self.labels[i]
        return str(i)


@dataclass(frozen=True)
class VertexId:
    word: Word
    index: int

    @property
    def depth(self) -> int:
        return len(self.word)

    def key(self):
        return (len(self.word), self.word, self.index)

    def __lt__(self, other: "VertexId") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        return format_address(self.word, self.index)


def format_address(word: Word, n: int) -> str:
    if any(c >= 10 for c in word):
        w = ".".join(map(str, word))
    else:
        w = "".join(map(str, word))
    return f"{w}:{n}"


def parse_address(text: str) -> Rep:
    text = text.strip()
    if ":" not in text:
        raise SpecError(f"bad vertex address {text!r}; expected 'w:n'")
    w, n = text.rsplit(":", 1)
    if "." in w:
        word = tuple(int(c) for c in w.split("."))
    else:
        word = tuple(int(c) for c in w)
    return word, int(n)


# ---------------------------------------------------------------------------
# canonical addresses
# ---------------------------------------------------------------------------

def _rep_key(rep: Rep):
    return (len(rep[0]), rep[0], rep[1])


def _id_moves(spec: FractalSpec):
    moves: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for a, b in spec.identifications:
        a, b = tuple(a), tuple(b)
        moves.setdefault(a, []).append(b)
        moves.setdefault(b, []).append(a)
    return moves


def representations(spec: FractalSpec, word: Sequence[int], n: int) -> List[Rep]:
    """All representations of F_w q_n with words no longer than w."""
    word = tuple(word)
    _check_rep(spec, word, n)
    limit = len(word)
    moves = _id_moves(spec)
    seen = {(word, n)}
    stack = [(word, n)]
    while stack:
        w, k = stack.pop()
        nxt = []
        if w and w[-1] == k:
            nxt.append((w[:-1], k))
        if len(w) < limit and k < spec.n_maps:
            nxt.append((w + (k,), k))
        if w:
            for j, m in moves.get((w[-1], k), ()):
                nxt.append((w[:-1] + (j,), m))
        for rep in nxt:
            if rep not in seen:
                seen.add(rep)
                stack.append(rep)
    return sorted(seen, key=_rep_key)


def canonicalize(spec: FractalSpec, word: Sequence[int], n: int) -> VertexId:
    """Canonical address of F_w q_n: shortest word, then lexicographic order."""
    w, k = representations(spec, word, n)[0]
    return VertexId(w, k)


def _check_rep(spec: FractalSpec, word: Word, n: int) -> None:
    if not 0 <= n < spec.n_boundary:
        raise SpecError(f"boundary index {n} out of range")
    for c in word:
        if not 0 <= c < spec.n_maps:
            raise SpecError(f"map index {c} out of range")


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def words(n_maps: int, m: int) -> Iterable[Word]:
    return itertools.product(range(n_maps), repeat=m)


def r_word(spec: FractalSpec, word: Word) -> Fraction:
    out = Fraction(1)
    for i in word:
        out *= spec.r[i]
    return out


def mu_word(spec: FractalSpec, word: Word) -> Fraction:
    out = Fraction(1)
    for i in word:
        out *= spec.mu[i]
    return out


class CellGraph:
    """Gamma_m: vertices V_m, one complete conductance pattern per m-cell."""

    def __init__(self, spec: FractalSpec, depth: int):
        self.spec = spec
        self.depth = depth
        nb, nm = spec.n_boundary, spec.n_maps
        reps = [(w, n) for w in words(nm, depth) for n in range(nb)]
        slot = {rep: i for i, rep in enumerate(reps)}
        parent = list(range(len(reps)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for level in range(depth):
            pad = depth - level - 1
            for u in words(nm, level):
                for (i, a), (j, b) in spec.identifications:
                    x = slot[(u + (i,) + (a,) * pad, a)]
                    y = slot[(u + (j,) + (b,) * pad, b)]
                    rx, ry = find(x), find(y)
                    if rx != ry:
                        parent[rx] = ry

        best: Dict[int, Rep] = {}
        for i, (w, n) in enumerate(reps):
            while w and w[-1] == n:
                w = w[:-1]
            root = find(i)
            cur = best.get(root)
            if cur is None or _rep_key((w, n)) < _rep_key(cur):
                best[root] = (w, n)
        ordered = sorted(set(best.values()), key=_rep_key)
        self.vertices: List[VertexId] = [VertexId(w, n) for w, n in ordered]
        self.index: Dict[VertexId, int] = {v: i for i, v in enumerate(self.vertices)}
        root_to_vertex = {root: self.index[VertexId(*rep)] for root, rep in best.items()}
        self._rep_index: Dict[Rep, int] = {rep: root_to_vertex[find(i)] for i, rep in enumerate(reps)}

        self.cells: Dict[Word, Tuple[int, ...]] = {}
        for w in words(nm, depth):
            self.cells[w] = tuple(self._rep_index[(w, n)] for n in range(nb))

        self.adjacency: List[Dict[int, Fraction]] = [dict() for _ in self.vertices]
        self.eta = [0] * len(self.vertices)
        conds = [(j, k, c) for j, k, c in spec.conductances if c]
        for w, corners in self.cells.items():
            rinv = 1 / r_word(spec, w)
            for x in corners:
                self.eta[x] += 1
            for j, k, c in conds:
                a, b = corners[j], corners[k]
                g = rinv * c
                self.adjacency[a][b] = self.adjacency[a].get(b, 0) + g
                self.adjacency[b][a] = self.adjacency[b].get(a, 0) + g

    def __len__(self) -> int:
        return len(self.vertices)

    def locate(self, word: Sequence[int], n: int) -> int:
        """Index of the vertex F_w q_n, for any word of length at most depth."""
        word = tuple(word)
        if len(word) > self.depth:
            raise SpecError(f"word {word} deeper than graph depth {self.depth}")
        return self._rep_index[(word + (n,) * (self.depth - len(word)), n)]

    def vertex(self, word: Sequence[int], n: int) -> VertexId:
        return self.vertices[self.locate(word, n)]

    def lookup(self, v) -> int:
        if isinstance(v, str):
            v = parse_address(v)
        if isinstance(v, VertexId):
            return self.locate(v.word, v.index)
        return self.locate(*v)

    def boundary(self) -> List[int]:
        return [self.locate((), n) for n in range(self.spec.n_boundary)]

    def cell_corners(self, word: Word) -> Tuple[int, ...]:
        """Corner indices of a cell whose depth is at most the graph depth."""
        if len(word) == self.depth:
            return self.cells[word]
        return tuple(self.locate(word, n) for n in range(self.spec.n_boundary))

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for y in self.adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.vertices)


@lru_cache(maxsize=32)
def build_graph(spec: FractalSpec, depth: int) -> CellGraph:
    return CellGraph(spec, depth)


def enumerate_vertices(spec: FractalSpec, depth: int) -> List[VertexId]:
    return list(build_graph(spec, depth).vertices)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    errors: List[str]
    warnings: List[str]


def validate_spec(spec: FractalSpec) -> ValidationReport:
    errors: List[str] = []
    warnings: List[str] = []
    nm, nb = spec.n_maps, spec.n_boundary
    if nb < 2:
        errors.append("need at least two boundary points")
    if nb > nm:
        errors.append("each boundary point must be the fixed point of its own map")
    if len(spec.r) != nm or len(spec.mu) != nm:
        errors.append("r and mu must have one entry per map")
    if any(not 0 < x < 1 for x in spec.r):
        errors.append("energy renormalization factors must lie in (0, 1)")
    if any(x <= 0 for x in spec.mu):
        errors.append("measure weights must be positive")
    if sum(spec.mu, Fraction(0)) != 1:
        errors.append(f"measure weights sum to {fmt_rational(sum(spec.mu, Fraction(0)))}, not 1")
    for j, k, c in spec.conductances:
        if not (0 <= j < nb and 0 <= k < nb) or j == k:
            errors.append(f"bad conductance pair ({j}, {k})")
        elif c <= 0:
            errors.append(f"conductance on ({j}, {k}) must be positive")
    for a, b in spec.identifications:
        for i, n in (a, b):
            if not (0 <= i < nm and 0 <= n < nb):
                errors.append(f"identification refers to missing point F_{i} q_{n}")
        if a[0] == b[0]:
            errors.append(f"identification glues two points of cell {a[0]}")
    if errors:
        return ValidationReport(False, errors, warnings)

    g0 = build_graph(spec, 0)
    if not g0.is_connected():
        errors.append("boundary conductance network is disconnected")
    g1 = build_graph(spec, 1)
    for i, corners in g1.cells.items():
        if len(set(corners)) != nb:
            errors.append(f"identifications glue two corners of cell {i[0]}")
    if len(set(g1.boundary())) != nb:
        errors.append("identifications glue two boundary points")
    for n in range(nb):
        x = g1.locate((), n)
        if g1.eta[x] != 1:
            warnings.append(f"boundary point q_{n} lies in {g1.eta[x]} first-level cells")
    if not g1.is_connected():
        errors.append("first-level graph is disconnected")
    if not errors and not renormalization_consistent(spec):
        errors.append(
            "energy renormalization is inconsistent: the first-level energy does not restrict to "
            "the boundary energy with these factors and identifications"
        )
    return ValidationReport(not errors, errors, warnings)


def renormalization_consistent(spec: FractalSpec) -> bool:
    """True when the trace of the first-level network on V_0 is the boundary network."""
    from .linalg import solve

    g1 = build_graph(spec, 1)
    bd = g1.boundary()
    interior = [x for x in range(len(g1)) if x not in bd]
    pos = {x: i for i, x in enumerate(interior)}
    lap = [[Fraction(0)] * len(interior) for _ in interior]
    for x in interior:
        for y, c in g1.adjacency[x].items():
            lap[pos[x]][pos[x]] += c
            if y in pos:
                lap[pos[x]][pos[y]] -= c
    nb = spec.n_boundary
    trace = [[Fraction(0)] * nb for _ in range(nb)]
    for k in range(nb):
        rhs = [g1.adjacency[x].get(bd[k], Fraction(0)) for x in interior]
        u = solve(lap, rhs) if interior else []
        vals = {bd[j]: Fraction(int(j == k)) for j in range(nb)}
        vals.update({x: u[pos[x]] for x in interior})
        for j in range(nb):
            x = bd[j]
            trace[j][k] = sum((c * (vals[x] - vals[y]) for y, c in g1.adjacency[x].items()), Fraction(0))
    for j in range(nb):
        for k in range(nb):
            want = sum((spec.conductance(j, l) for l in range(nb) if l != j), Fraction(0)) if j == k else -spec.conductance(j, k)
            if trace[j][k] != want:
                return False
    return True


# ---------------------------------------------------------------------------
# built-in specifications
# ---------------------------------------------------------------------------

def _similarity_maps(points, ratio):
    return tuple((ratio, 0.0, 0.0, ratio, (1 - ratio) * x, (1 - ratio) * y) for x, y in points)


def interval() -> FractalSpec:
    pts = ((0.0, 0.0), (1.0, 0.0))
    return FractalSpec(
        name="interval",
        n_maps=2,
        n_boundary=2,
        r=(Fraction(1, 2),) * 2,
        mu=(Fraction(1, 2),) * 2,
        conductances=((0, 1, Fraction(1)),),
        identifications=(((0, 1), (1, 0)),),
        embedding=Embedding(pts, _similarity_maps(pts, 0.5)),
    )


def _polygon(n: int):
    if n == 2:
        return ((0.0, 0.0), (1.0, 0.0))
    if n == 4:
        # projection of a tetrahedron seen from above one face
        return ((0.0, 0.9), (-0.8660254037844386, -0.5), (0.8660254037844386, -0.5), (0.0, -0.1))
    return tuple((math.sin(2 * math.pi * k / n), math.cos(2 * math.pi * k / n)) for k in range(n))


def nhedron(n: int, name: Optional[str] = None) -> FractalSpec:
    """Gasket on n mutually adjacent boundary points, ratio 1/2 maps."""
    if n < 2:
        raise SpecError("n-hedron needs n >= 2")
    pts = _polygon(n)
    return FractalSpec(
        name=name or f"nhedron:{n}",
        n_maps=n,
        n_boundary=n,
        r=(Fraction(n, n + 2),) * n,
        mu=(Fraction(1, n),) * n,
        conductances=tuple((j, k, Fraction(1)) for j in range(n) for k in range(j + 1, n)),
        identifications=tuple(((i, j), (j, i)) for i in range(n) for j in range(i + 1, n)),
        embedding=Embedding(pts, _similarity_maps(pts, 0.5)),
    )


def sierpinski_gasket() -> FractalSpec:
    return nhedron(3, name="sg")


def tetrahedron() -> FractalSpec:
    return nhedron(4, name="st")


def sg3() -> FractalSpec:
    """Level-3 gasket: three corner cells and three edge cells around a center."""
    s = math.sqrt(3)
    pts = ((0.0, 3 * s), (-4.5, -1.5 * s), (4.5, -1.5 * s))
    shifts = ((0.0, 2 * s), (-3.0, -s), (3.0, -s), (-1.5, 0.5 * s), (1.5, 0.5 * s), (0.0, -s))
    maps = tuple((1 / 3, 0.0, 0.0, 1 / 3, e, f) for e, f in shifts)
    return FractalSpec(
        name="sg3",
        n_maps=6,
        n_boundary=3,
        r=(Fraction(7, 15),) * 6,
        mu=(Fraction(1, 6),) * 6,
        conductances=((0, 1, Fraction(1)), (0, 2, Fraction(1)), (1, 2, Fraction(1))),
        identifications=(
            ((0, 1), (3, 0)),
            ((0, 2), (4, 0)),
            ((1, 0), (3, 1)),
            ((1, 2), (5, 1)),
            ((2, 0), (4, 2)),
            ((2, 1), (5, 2)),
            ((3, 2), (4, 1)),
            ((4, 1), (5, 0)),
        ),
        embedding=Embedding(pts, maps),
        labels=("0", "1", "2", "(01)", "(02)", "(12)"),
    )


BUILTINS = {"sg": sierpinski_gasket, "st": tetrahedron, "sg3": sg3, "interval": interval}


def builtin(name: str) -> FractalSpec:
    name = name.strip().lower()
    if name.startswith("nhedron:"):
        return nhedron(int(name.split(":", 1)[1]))
    if name not in BUILTINS:
        raise SpecError(f"unknown built-in spec {name!r}")
    return BUILTINS[name]()


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def spec_from_dict(data: dict) -> FractalSpec:
    try:
        emb = None
        if data.get("embedding"):
            e = data["embedding"]
            emb = Embedding(
                tuple(tuple(map(float, p)) for p in e["points"]),
                tuple(tuple(map(float, m)) for m in e["maps"]),
            )
        return FractalSpec(
            name=str(data.get("name", "custom")),
            n_maps=int(data["n_maps"]),
            n_boundary=int(data["n_boundary"]),
            r=tuple(parse_rational(x) for x in data["r"]),
            mu=tuple(parse_rational(x) for x in data["mu"]),
            conductances=tuple((int(j), int(k), parse_rational(c)) for j, k, c in data["conductances"]),
            identifications=tuple(
                ((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in data["identifications"]
            ),
            embedding=emb,
            labels=tuple(data["labels"]) if data.get("labels") else None,
        )
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"malformed fractal spec: {exc}") from exc


def spec_to_dict(spec: FractalSpec) -> dict:
    out = {
        "name": spec.name,
        "n_maps": spec.n_maps,
        "n_boundary": spec.n_boundary,
        "r": [fmt_rational(x) for x in spec.r],
        "mu": [fmt_rational(x) for x in spec.mu],
        "conductances": [[j, k, fmt_rational(c)] for j, k, c in spec.conductances],
        "identifications": [[list(a), list(b)] for a, b in spec.identifications],
    }
    if spec.embedding:
        out["embedding"] = {"points": [list(p) for p in spec.embedding.points], "maps": [list(m) for m in spec.embedding.maps]}
    if spec.labels:
        out["labels"] = list(spec.labels)
    return out


def load_spec(source: str) -> FractalSpec:
    """Load `builtin:<name>` or a JSON file path."""
    if source.startswith("builtin:"):
        return builtin(source[len("builtin:"):])
    with open(source) as fh:
        return spec_from_dict(json.load(fh))
