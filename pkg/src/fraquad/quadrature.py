"""Quadrature weights on node sets and the resulting error bounds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional

from .fractal import FractalSpec, SpecError, VertexId, build_graph
from .green import Interval, delta0_sq, delta1, normalize_nodes
from .harmonic import _Factored, _use_exact, energy_form, graph_laplacian_estimate, vertex_masses
from .rational import parse_rational


def natural_weights(
    spec: FractalSpec,
    nodes: Iterable,
    measure=None,
    depth: Optional[int] = None,
    exact: Optional[bool] = True,
) -> Dict[VertexId, Fraction]:
    """p(x) = integral of the indicator spline v_x against the measure.

    Computed with one adjoint solve: p_E = c_E + C^T L_UU^{-1} c_U, where c are
    the tent-function masses, U the vertices off E and C the coupling of U to E.
    """
    nodes = normalize_nodes(spec, nodes)
    if not nodes:
        raise SpecError("empty node set")
    m = max(max(v.depth for v in nodes), depth or 0)
    graph = build_graph(spec, m)
    idx = {graph.index[v] for v in nodes}
    masses = vertex_masses(graph, measure)
    unknowns = [x for x in range(len(graph)) if x not in idx]
    out = {graph.vertices[x]: masses[x] for x in idx}
    if unknowns:
        fac = _Factored(graph, unknowns, _use_exact(exact, len(unknowns)))
        z = fac.factor.solve({x: masses[x] for x in unknowns})
        for x in unknowns:
            for y, c in fac.coupling[x].items():
                out[graph.vertices[y]] += c * z[x]
    return out


def uniform_weights(spec: FractalSpec, nodes: Iterable, mass: Fraction = Fraction(1)) -> Dict[VertexId, Fraction]:
    nodes = normalize_nodes(spec, nodes)
    return {v: mass / len(nodes) for v in nodes}


def integrate(values: Mapping, weights: Mapping):
    """Quadrature sum; every weighted node must have a value."""
    total = Fraction(0)
    for v, w in weights.items():
        if v not in values:
            raise SpecError(f"no sample at node {v}")
        total += w * values[v]
    return total


def discrepancy_coefficient(p: Mapping, w: Mapping) -> Fraction:
    """delta(E, w) = sum over E of |p(x) - w(x)|."""
    keys = set(p) | set(w)
    return sum((abs(p.get(k, 0) - w.get(k, 0)) for k in keys), Fraction(0))


def read_weights(spec: FractalSpec, path: str) -> Dict[VertexId, Fraction]:
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            v = normalize_nodes(spec, [row["vertex"]])[0]
            out[v] = parse_rational(row.get("weight", row.get("value")))
    return out


# ---------------------------------------------------------------------------
# error budget
# ---------------------------------------------------------------------------

@dataclass
class Bound:
    """constant + r_coefficient * sqrt(R)."""

    constant: float
    r_coefficient: float = 0.0
    estimated: bool = False

    def value(self, resistance: Optional[float]) -> Optional[float]:
        if self.r_coefficient == 0:
            return self.constant
        if resistance is None:
            return None
        return self.constant + self.r_coefficient * math.sqrt(resistance)


@dataclass
class ErrorBudget:
    delta0_sq: Fraction
    delta1: Interval
    coefficient: Fraction
    energy: float
    energy_estimated: bool
    laplacian_l1: Optional[float]
    laplacian_estimated: bool
    resistance: Optional[float] = None
    bounds: Dict[str, Bound] = field(default_factory=dict)
    advisories: list = field(default_factory=list)

    def value(self, name: str) -> Optional[float]:
        return self.bounds[name].value(self.resistance)


def laplacian_l1_estimate(spec: FractalSpec, values, depth: int) -> float:
    """sum over interior x of |Delta_m f(x)| times the mass of psi_x.

    A lower estimate of the L^1 norm of the Laplacian.
    """
    graph = build_graph(spec, depth)
    lap = graph_laplacian_estimate(graph, values)
    masses = vertex_masses(graph)
    bd = set(graph.boundary())
    return float(sum(abs(lap[x]) * masses[x] for x in range(len(graph)) if x not in bd))


def error_budget(
    spec: FractalSpec,
    nodes: Iterable,
    weights: Optional[Mapping] = None,
    values=None,
    depth: Optional[int] = None,
    energy=None,
    laplacian_l1=None,
    resistance: Optional[float] = None,
    gE_norm: Optional[float] = None,
    laplacian_p_norm: Optional[float] = None,
    sup_depth: int = 9,
    method: str = "green-identity",
) -> ErrorBudget:
    """Error bounds for integrating f with the given weights on E.

    `values` are samples of f on V_depth (a vertex-indexed list); they feed the
    energy and Laplacian estimates unless exact values are supplied.
    """
    nodes = normalize_nodes(spec, nodes)
    p = natural_weights(spec, nodes)
    w = p if weights is None else weights
    coeff = discrepancy_coefficient(p, w)
    d0 = delta0_sq(spec, nodes, method)
    d1 = delta1(spec, nodes, sup_depth, method).interval
    advisories = []
    e_est = energy is None
    if e_est:
        if values is None or depth is None:
            raise ValueError("need samples on V_depth or an exact energy")
        energy = energy_form(build_graph(spec, depth), values)
        advisories.append(f"energy estimated from V_{depth} samples (a lower estimate)")
    l_est = laplacian_l1 is None
    if l_est and values is not None and depth is not None:
        laplacian_l1 = laplacian_l1_estimate(spec, values, depth)
        advisories.append(f"Laplacian L1 norm estimated from V_{depth} samples")
    elif l_est:
        laplacian_l1 = None
    if resistance is None:
        advisories.append("resistance radius not supplied; bounds with a resistance term are symbolic")
    s0 = math.sqrt(float(d0))
    se = math.sqrt(float(energy))
    c = float(coeff)
    bounds = {"natural_energy": Bound(s0 * se, 0.0, e_est)}
    bounds["general_energy"] = Bound(s0 * se, c * se, e_est)
    if laplacian_l1 is not None:
        sup = float(d1.upper) * float(laplacian_l1)
        bounds["natural_laplacian"] = Bound(sup, 0.0, l_est)
        bounds["general_laplacian"] = Bound(sup, c * se, l_est or e_est)
    if gE_norm is not None and laplacian_p_norm is not None:
        bounds["general_holder"] = Bound(gE_norm * laplacian_p_norm, c * se, True)
    return ErrorBudget(d0, d1, coeff, float(energy), e_est, laplacian_l1, l_est, resistance, bounds, advisories)
