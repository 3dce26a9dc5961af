"""Exact quadrature, Green's functions and discrepancy on p.c.f. self-similar fractals."""

from .fractal import FractalSpec, SpecError, VertexId, build_graph, builtin, load_spec, validate_spec
from .green import delta0_sq, delta1, g_v0_integral, interpolant, level_set
from .quadrature import error_budget, integrate, natural_weights, uniform_weights

__version__ = "0.1.0"

__all__ = [
    "FractalSpec",
    "SpecError",
    "VertexId",
    "build_graph",
    "builtin",
    "load_spec",
    "validate_spec",
    "delta0_sq",
    "delta1",
    "g_v0_integral",
    "interpolant",
    "level_set",
    "error_budget",
    "integrate",
    "natural_weights",
    "uniform_weights",
]
