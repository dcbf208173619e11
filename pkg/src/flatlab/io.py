"""JSON readers and writers for algebras, connections, fields and group charts.

Every document may carry ``"schema": 1``; other schema versions are rejected.
Indices in ``lsa.json`` and ``connection.json`` are 0-based; connection
indices may also be given as variable names.
"""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import exactmath as em
from .connection import Chart, Connection, VectorField
from .errors import ParseError
from .liegroup import GroupChart
from .lsa import StructureConstants

SCHEMA = 1


def data_path(name: str) -> Path:
    return Path(str(resources.files("flatlab") / "data" / name))


def resolve(path) -> Path:
    """``path`` itself if it exists, else the bundled data file with that base name."""
    p = Path(path)
    if p.exists():
        return p
    for candidate in (p.name, p.name + ".json"):
        q = data_path(candidate)
        if q.exists():
            return q
    raise FileNotFoundError(f"no such file: {path} (and no bundled data file named {p.name})")


def load(path) -> dict:
    p = resolve(path)
    text = p.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno, str(p)) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object", 1, 1, str(p))
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ParseError(f"unsupported schema version {doc.get('schema')!r}", source=str(p))
    doc.setdefault("_source", str(p))
    return doc


def _fraction(v, source=None) -> Fraction:
    try:
        return Fraction(v) if not isinstance(v, float) else Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not an exact rational: {v!r}", source=source) from None


def lsa_from_json(doc: dict) -> StructureConstants:
    src = doc.get("_source")
    try:
        n = int(doc["dim"])
        labels = tuple(doc.get("labels") or ())
        products = {}
        for entry in doc.get("products", []):
            i, j = int(entry["left"]), int(entry["right"])
            if not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"product index ({i}, {j}) out of range", source=src)
            vec = products.setdefault((i, j), {})
            for k, value in entry["result"]:
                if not 0 <= int(k) < n:
                    raise ParseError(f"result index {k} out of range", source=src)
                vec[int(k)] = vec.get(int(k), 0) + _fraction(value, src)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed lsa document: {exc!r}", source=src) from None
    return StructureConstants.from_products(n, products, labels)


def lsa_to_json(A: StructureConstants) -> dict:
    products = []
    for i in range(A.dim):
        for j in range(A.dim):
            res = [[k, str(v)] for k, v in enumerate(A.c[i][j]) if v]
            if res:
                products.append({"left": i, "right": j, "result": res})
    return {"schema": SCHEMA, "dim": A.dim, "labels": list(A.basis_labels), "products": products}


def _index(chart, v, src):
    if isinstance(v, str):
        if v not in chart.variables:
            raise ParseError(f"unknown index variable {v!r}", source=src)
        return chart.variables.index(v)
    v = int(v)
    if not 0 <= v < chart.dim:
        raise ParseError(f"index {v} out of range", source=src)
    return v


def chart_from_json(doc: dict) -> Chart:
    src = doc.get("_source")
    try:
        return Chart(tuple(doc["variables"]), tuple(doc.get("nonvanishing", ())))
    except KeyError as exc:
        raise ParseError(f"missing key {exc}", source=src) from None


def connection_from_json(doc: dict) -> Connection:
    src = doc.get("_source")
    chart = chart_from_json(doc)
    entries = {}
    for g in doc.get("gamma", []):
        try:
            k = _index(chart, g["upper"], src)
            i, j = (_index(chart, v, src) for v in g["lower"])
            entries[(k, i, j)] = chart.parse(str(g["value"]), src)
        except KeyError as exc:
            raise ParseError(f"gamma entry missing {exc}", source=src) from None
    return Connection.from_entries(chart, entries)


def connection_to_json(conn: Connection) -> dict:
    n = conn.dim
    gamma = []
    for k in range(n):
        for i in range(n):
            for j in range(n):
                v = conn.gamma[k][i][j]
                if v != 0:
                    gamma.append({"upper": k, "lower": [i, j], "value": em.fmt(v)})
    return {"schema": SCHEMA, "variables": list(conn.chart.variables),
            "nonvanishing": [em.fmt(p) for p in conn.chart.nonvanishing], "gamma": gamma}


def fields_from_json(doc: dict, chart: Chart) -> list[tuple[str, VectorField]]:
    """``{"fields": [{"name": ..., "components": [...]}, ...]}`` or a name -> components mapping."""
    src = doc.get("_source")
    raw = doc.get("fields")
    if raw is None:
        raise ParseError("fields document needs a 'fields' entry", source=src)
    items = raw.items() if isinstance(raw, dict) else ((f["name"], f["components"]) for f in raw)
    out = []
    for name, comps in items:
        if len(comps) != chart.dim:
            raise ParseError(f"field {name!r} has {len(comps)} components, chart has {chart.dim}",
                             source=src)
        out.append((str(name), chart.field_from([str(c) for c in comps])))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ParseError("field names must be distinct", source=src)
    return out


def fields_to_json(named) -> dict:
    return {"schema": SCHEMA,
            "fields": [{"name": n, "components": [em.fmt(c) for c in f.components]} for n, f in named]}


def group_from_json(doc: dict) -> GroupChart:
    src = doc.get("_source")
    chart = chart_from_json(doc)
    try:
        left = tuple(chart.field_from([str(c) for c in comps]) for comps in doc["left_frame"])
        right = tuple(chart.field_from([str(c) for c in comps]) for comps in doc["right_frame"])
        ident = tuple(_fraction(v, src) for v in doc["identity"])
    except KeyError as exc:
        raise ParseError(f"group document missing {exc}", source=src) from None
    return GroupChart(doc.get("name", Path(src).stem if src else "custom"), chart, ident, left, right)


def dump(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
