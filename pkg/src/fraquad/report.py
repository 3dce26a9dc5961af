"""Versioned JSON/CSV reports and the sample-file readers.

Every number is written twice: exactly as "p/q" and as a decimal with 15
significant digits. Quantities known through their square (delta_0) carry the
square as well.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from .fractal import FractalSpec, SpecError, VertexId
from .green import Interval, normalize_nodes
from .rational import fmt_decimal, fmt_rational, number_record, parse_rational, sqrt_record

SCHEMA = "fraquad-report"
SCHEMA_VERSION = 1


class Root:
    """Marks a value known exactly through its square."""

    def __init__(self, square: Fraction):
        self.square = Fraction(square)


def encode(x: Any) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (Fraction, int)):
        return number_record(Fraction(x))
    if isinstance(x, float):
        return number_record(x)
    if isinstance(x, Root):
        return sqrt_record(x.square)
    if isinstance(x, VertexId):
        return str(x)
    if isinstance(x, Interval):
        return {"lower": encode(x.lower), "upper": encode(x.upper), "exact": x.exact}
    if isinstance(x, Mapping):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if hasattr(x, "as_dict"):
        return encode(x.as_dict())
    raise TypeError(f"cannot encode {type(x).__name__}")


def decode(x: Any) -> Any:
    """Inverse of encode for numbers: records become Fractions (or floats when inexact)."""
    if isinstance(x, dict):
        if set(x) == {"exact", "decimal"}:
            return parse_rational(x["exact"]) if x["exact"] is not None else float(x["decimal"])
        return {k: decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [decode(v) for v in x]
    return x


def make_report(kind: str, spec: Optional[FractalSpec], data: Mapping, **meta) -> dict:
    out = {"schema": SCHEMA, "version": SCHEMA_VERSION, "kind": kind}
    if spec is not None:
        out["spec"] = spec.name
    out.update(meta)
    out["data"] = encode(data)
    return out


def dumps(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    report = json.loads(text)
    if report.get("schema") != SCHEMA:
        raise SpecError("not a fraquad report")
    if report.get("version") != SCHEMA_VERSION:
        raise SpecError(f"unsupported report version {report.get('version')}")
    report = dict(report)
    report["data"] = decode(report["data"])
    return report


def table_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV where each numeric cell expands to an exact and a decimal column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = list(rows)
    numeric = [any(isinstance(r[i], (Fraction, int, float)) and not isinstance(r[i], bool) for r in rows)
               for i in range(len(header))]
    head = []
    for name, num in zip(header, numeric):
        head += [name, f"{name}_decimal"] if num else [name]
    w.writerow(head)
    for r in rows:
        out = []
        for cell, num in zip(r, numeric):
            if num:
                out += [fmt_rational(cell) if isinstance(cell, (Fraction, int)) else repr(float(cell)), fmt_decimal(cell)]
            else:
                out.append(str(cell))
        w.writerow(out)
    return buf.getvalue()


def read_table_csv(text: str) -> List[Dict[str, Any]]:
    """Parse a table written by table_csv back into exact values."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for k, v in row.items():
            if k.endswith("_decimal"):
                continue
            rec[k] = parse_rational(v) if f"{k}_decimal" in row else v
        rows.append(rec)
    return rows


def _address_rows(path: str) -> List[List[str]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip().lower() in ("vertex", "address", "node"):
        rows = rows[1:]
    return rows


def read_nodes(spec: FractalSpec, path: str) -> tuple:
    """Sample-set file: one canonical or non-canonical address per row."""
    return normalize_nodes(spec, [r[0].strip() for r in _address_rows(path)])


def read_values(spec: FractalSpec, path: str) -> Dict[VertexId, Fraction]:
    """CSV of vertex,value rows; addresses are canonicalized and must not repeat."""
    out: Dict[VertexId, Fraction] = {}
    for r in _address_rows(path):
        if len(r) < 2:
            raise SpecError(f"row {r} needs a vertex and a value")
        v = normalize_nodes(spec, [r[0].strip()])[0]
        if v in out:
            raise SpecError(f"vertex {v} listed twice")
        out[v] = parse_rational(r[1])
    return out
