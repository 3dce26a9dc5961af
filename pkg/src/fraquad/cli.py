"""Command-line interface: fraquad <command> [options]."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import energy as en
from . import multiharmonic as mh
from . import report as rp
from . import verify
from .fractal import SpecError, build_graph, load_spec, validate_spec
from .green import delta0_sq, delta1, g_e_values, g_v0_spline, level_set, normalize_nodes
from .harmonic import cell_boundary_values, estimate_resistance_radius
from .plot import render_svg
from .quadrature import (
    discrepancy_coefficient,
    error_budget,
    integrate,
    natural_weights,
    read_weights,
    uniform_weights,
)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--spec", default="builtin:sg", help="builtin:sg|st|sg3|interval|nhedron:n or a JSON file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=True, help="exact rational solves (default)")
    mode.add_argument("--float", dest="exact", action="store_false", help="floating-point sparse solves")
    p.add_argument("--depth", type=int, default=None, help="graph depth for sampled quantities")
    p.add_argument("--g1", choices=mh.G1_METHODS.keys(), default="green-identity", help="first-level Green values route")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _nodes(spec, text: Optional[str]):
    """level:m, list:a,b,c, or a CSV file of addresses; V_0 by default."""
    if not text:
        return level_set(spec, 0)
    if text.startswith("level:"):
        return level_set(spec, int(text[6:]))
    if text.startswith("list:"):
        return normalize_nodes(spec, [a for a in text[5:].split(",") if a.strip()])
    return rp.read_nodes(spec, text)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(args, kind: str, spec, data: dict, csv_rows=None, **meta) -> None:
    if args.format == "csv" and csv_rows is not None:
        header, rows = csv_rows
        _emit(args, rp.table_csv(header, rows))
    else:
        _emit(args, rp.dumps(rp.make_report(kind, spec, data, **meta)))


def _matrix_rows(name: str, m, labels: Optional[Sequence[str]] = None) -> List[list]:
    lab = (lambda i: labels[i]) if labels else str
    return [[name, lab(a), lab(b), x] for a, row in enumerate(m) for b, x in enumerate(row)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    res = validate_spec(spec)
    data = {"ok": res.ok, "errors": res.errors, "warnings": res.warnings}
    rows = [["error", e] for e in res.errors] + [["warning", w] for w in res.warnings]
    _emit_report(args, "validate", spec, data, (["level", "message"], rows))
    return 0 if res.ok else 1


def cmd_tables(args) -> int:
    spec = load_spec(args.spec)
    want = [x.strip() for x in args.emit.split(",") if x.strip()]
    data: Dict[str, object] = {}
    rows: List[list] = []
    for key in want:
        if key == "a":
            m = mh.product_matrix(spec)
            data["product_matrix"] = m
            data["product_index"] = [f"{k}{kk}" for k, kk in mh.index_pairs(spec)]
            rows += _matrix_rows("a", m)
        elif key == "i":
            m = mh.product_integrals(spec)
            data["product_integrals"] = m
            rows += _matrix_rows("i", m)
        elif key in ("x", "g"):
            m = mh.energy_matrix(spec) if key == "x" else mh.green_matrix(spec)
            data["interior_vertices"] = [str(v) for v in mh.interior_vertices(spec)]
            data["energy_matrix" if key == "x" else "green_matrix"] = m
            rows += _matrix_rows(key, m)
        elif key == "f1":
            fs = mh.f1k_values(spec)
            data["f1"] = [{str(v): x for v, x in f.items()} for f in fs]
            rows += [[f"f1{k}", str(v), "", x] for k, f in enumerate(fs) for v, x in f.items()]
        elif key == "g1":
            vals = mh.g1_values(spec, args.g1)
            data["g1"] = {str(v): x for v, x in vals.items()}
            rows += [["g1", str(v), "", x] for v, x in vals.items()]
        else:
            raise SpecError(f"unknown table {key!r}; choose from a,i,x,g,f1,g1")
    _emit_report(args, "tables", spec, data, (["table", "row", "col", "value"], rows), g1_method=args.g1)
    return 0


def cmd_green(args) -> int:
    spec = load_spec(args.spec)
    if args.set:
        nodes = _nodes(spec, args.set)
        s = g_e_values(spec, nodes, args.depth, args.g1)
        kind = "green-discrepancy"
    else:
        s = g_v0_spline(spec, args.depth if args.depth is not None else 1, args.g1)
        kind = "green-v0"
    vals = s.as_dict()
    _emit_report(args, kind, spec, {"depth": s.graph.depth, "values": {str(v): x for v, x in vals.items()}},
                 (["vertex", "value"], [[str(v), x] for v, x in vals.items()]), g1_method=args.g1)
    return 0


def _disc_data(spec, nodes, args) -> dict:
    d0 = delta0_sq(spec, nodes, args.g1)
    d1 = delta1(spec, nodes, args.depth if args.depth is not None else 9, args.g1)
    p = natural_weights(spec, nodes, exact=args.exact if args.exact else False)
    coeff = discrepancy_coefficient(p, uniform_weights(spec, nodes))
    return {
        "nodes": [str(v) for v in nodes],
        "delta0_sq": d0,
        "delta0": rp.Root(d0),
        "delta1": d1.interval,
        "delta1_argmax_sample": str(d1.argmax),
        "weights": {str(v): w for v, w in p.items()},
        "delta_Ew_coeff": coeff,
    }


def cmd_disc(args) -> int:
    spec = load_spec(args.spec)
    nodes = _nodes(spec, args.set)
    data = _disc_data(spec, nodes, args)
    rows = [["delta0_sq", data["delta0_sq"]], ["delta1_lower", data["delta1"].lower],
            ["delta1_upper", data["delta1"].upper], ["delta_Ew_coeff", data["delta_Ew_coeff"]]]
    _emit_report(args, "disc", spec, data, (["quantity", "value"], rows), g1_method=args.g1)
    return 0


def _measure(spec, text: str):
    if text in (None, "mu"):
        return None
    if text == "kusuoka":
        return en.EnergyMeasure.kusuoka(spec).normalized()
    if text.startswith("energy:"):
        return en.load_measure(spec, text[7:])
    raise SpecError(f"unknown measure {text!r}; use mu, kusuoka or energy:<file>")


def cmd_weights(args) -> int:
    spec = load_spec(args.spec)
    nodes = _nodes(spec, args.set)
    measure = _measure(spec, args.measure)
    p = natural_weights(spec, nodes, measure, args.depth, exact=args.exact if args.exact else False)
    data = {"measure": args.measure, "weights": {str(v): w for v, w in p.items()}, "total": sum(p.values(), Fraction(0))}
    _emit_report(args, "weights", spec, data, (["vertex", "weight"], [[str(v), w] for v, w in p.items()]))
    return 0


def cmd_integrate(args) -> int:
    spec = load_spec(args.spec)
    nodes = _nodes(spec, args.set)
    values = rp.read_values(spec, args.values)
    if args.weights == "natural":
        w = natural_weights(spec, nodes, exact=args.exact if args.exact else False)
    elif args.weights == "uniform":
        w = uniform_weights(spec, nodes)
    else:
        w = read_weights(spec, args.weights)
    data: Dict[str, object] = {"weights": args.weights, "estimate": integrate(values, w)}
    if args.budget:
        depth = args.depth
        samples = None
        if depth is not None:
            graph = build_graph(spec, depth)
            if all(v in values for v in graph.vertices):
                samples = [values[v] for v in graph.vertices]
        res = args.resistance
        if res is None and args.estimate_resistance is not None:
            res = estimate_resistance_radius(spec, args.estimate_resistance).value
        b = error_budget(spec, nodes, w, samples, depth, energy=args.energy, laplacian_l1=args.laplacian_l1,
                         resistance=res, method=args.g1)
        data["budget"] = {
            "delta0_sq": b.delta0_sq,
            "delta1": b.delta1,
            "delta_Ew_coeff": b.coefficient,
            "energy": b.energy,
            "energy_estimated": b.energy_estimated,
            "laplacian_l1": b.laplacian_l1,
            "laplacian_estimated": b.laplacian_estimated,
            "resistance": res,
            "resistance_estimated": args.resistance is None and res is not None,
            "bounds": {k: {"value": b.value(k), "constant": v.constant, "resistance_coefficient": v.r_coefficient,
                           "estimated": v.estimated} for k, v in b.bounds.items()},
            "advisories": b.advisories,
        }
    rows = [["estimate", data["estimate"]]]
    if args.budget:
        rows += [[f"bound_{k}", v["value"]] for k, v in sorted(data["budget"]["bounds"].items()) if v["value"] is not None]
    _emit_report(args, "integrate", spec, data, (["quantity", "value"], rows))
    return 0


def cmd_energy_tables(args) -> int:
    spec = load_spec(args.spec)
    want = [x.strip() for x in args.emit.split(",") if x.strip()]
    data: Dict[str, object] = {"pairs": [f"{j}{k}" for j, k in spec.pairs]}
    rows: List[list] = []
    for key in want:
        if key == "m":
            mats = en.energy_matrices(spec)
            data["cell_matrices"] = {spec.map_label(i): m for i, m in enumerate(mats)}
            for i, m in enumerate(mats):
                rows += _matrix_rows(f"M{spec.map_label(i)}", m, data["pairs"])
        elif key == "basic":
            data["basic_integrals"] = en.basic_integrals(spec)
            data["self_measure_integrals"] = en.d_table(spec)
            rows += [["basic", str(i), data["pairs"][p], x] for i, r in enumerate(en.basic_integrals(spec)) for p, x in enumerate(r)]
            rows += _matrix_rows("self", en.d_table(spec))
        else:
            raise SpecError(f"unknown table {key!r}; choose from m,basic")
    _emit_report(args, "energy-tables", spec, data, (["table", "row", "col", "value"], rows))
    return 0


def cmd_verify_paper(args) -> int:
    """JSON or CSV goes to --out; the status listing goes to stdout unless CSV is written there."""
    res = verify.run(args.scope)
    if args.format == "csv":
        rows = [[it.identifier, it.scope, it.status, verify.render(it.expected),
                 "; ".join(f"{k}={verify.render(v)}" for k, v in it.computed.items()), it.note] for it in res.items]
        _emit(args, rp.table_csv(["id", "scope", "status", "expected", "computed", "note"], rows))
    elif args.out:
        _emit(args, rp.dumps(rp.make_report("verify", None, res.as_dict(), scope=args.scope)))
    if args.format == "json" or args.out:
        lines = [f"{it.status:<24} {it.identifier}" for it in res.items]
        lines += ["", "conflicts:"] + ["  " + x for x in verify.conflict_report(res)]
        lines += ["", "summary: " + ", ".join(f"{k}={v}" for k, v in res.counts.items())]
        sys.stdout.write("\n".join(lines) + "\n")
    return 0 if res.ok else 1


def cmd_plot(args) -> int:
    spec = load_spec(args.spec)
    if args.values:
        vals = rp.read_values(spec, args.values)
    elif args.green:
        vals = g_v0_spline(spec, args.depth if args.depth is not None else 1, args.g1).as_dict()
    elif args.harmonic is not None:
        e = [Fraction(int(k == args.harmonic)) for k in range(spec.n_boundary)]
        g = build_graph(spec, args.depth if args.depth is not None else 1)
        vals = {}
        for w, corners in g.cells.items():
            for x, val in zip(corners, cell_boundary_values(spec, e, w)):
                vals[g.vertices[x]] = val
    else:
        vals = {}
    _emit(args, render_svg(spec, vals, args.depth, args.title))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fraquad", description="Exact quadrature and discrepancy on p.c.f. fractals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a fractal specification")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tables", parents=[common], help="first-level matrices and Green values")
    p.add_argument("--emit", default="a,i,x,g,f1,g1")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("green", parents=[common], help="Green's function of V_0, or g_E with --set")
    p.add_argument("--set", default=None, help="level:m, list:a,b,... or a CSV of addresses")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("disc", parents=[common], help="delta_0, delta_1, natural weights and the uniform-weight coefficient")
    p.add_argument("--set", default=None)
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("weights", parents=[common], help="natural quadrature weights")
    p.add_argument("--set", default=None)
    p.add_argument("--measure", default="mu", help="mu, kusuoka, or energy:<file>")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("integrate", parents=[common], help="quadrature of sampled values, optional error budget")
    p.add_argument("--set", default=None)
    p.add_argument("--weights", default="natural", help="natural, uniform, or a CSV file of vertex,weight")
    p.add_argument("--values", required=True, help="CSV of vertex,value samples")
    p.add_argument("--budget", action="store_true")
    p.add_argument("--energy", type=Fraction, default=None, help="exact energy of f, if known")
    p.add_argument("--laplacian-l1", type=Fraction, default=None, help="L1 norm of the Laplacian of f, if known")
    p.add_argument("--resistance", type=float, default=None, help="resistance radius R, if known")
    p.add_argument("--estimate-resistance", type=int, default=None, metavar="M",
                   help="estimate R from the graph of depth M (an estimate, not a bound)")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("energy-tables", parents=[common], help="energy-measure cell matrices and basic integrals")
    p.add_argument("--emit", default="m,basic")
    p.set_defaults(func=cmd_energy_tables)

    p = sub.add_parser("verify-paper", parents=[common], help="check the reference manifest")
    p.add_argument("--scope", choices=verify.SCOPES, default="all")
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("plot", parents=[common], help="SVG drawing of cells and vertex values")
    p.add_argument("--values", default=None, help="CSV of vertex,value")
    p.add_argument("--green", action="store_true", help="plot the Green's function of V_0")
    p.add_argument("--harmonic", type=int, default=None, metavar="K", help="plot the harmonic function h_K")
    p.add_argument("--title", default=None)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, OSError, ValueError) as exc:
        sys.stderr.write(f"fraquad: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
