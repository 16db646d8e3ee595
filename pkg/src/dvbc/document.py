"""The JSON scenario document read and written by the command-line tool.

Layout (every section except ``format`` optional)::

    {
      "format": 1,
      "complex": {"cells": [[0, 1], [0, 2], [1, 2]]},
      "bundle": {"dim": 2, "transports": [{"edge": [0, 1], "matrix": [[1, 0], [0, 1]]}, ...]},
      "metric": {"gram": [{"vertex": 0, "matrix": [[1, 0], [0, 1]]}, ...]},
      "cochains": {"a": {"type": "vector", "degree": 1, "values": [{"simplex": [0, 1], "value": [1, 2]}]}},
      "gauge": [{"vertex": 0, "matrix": [[1, 0], [0, 1]]}, ...]
    }

An edge ``[i, j]`` (``i < j``) carries ``U_ij``, mapping the fiber at ``j``
to the fiber at ``i``.  A transport entry may also give ``"inverse"``
explicitly; it is then stored as given, even if it is not the inverse, so
that the ``check`` command can report the damage.  ``dim`` is an integer or
an object keyed by vertex id.  Cochain types are ``scalar``, ``vector`` and
``hom``; hom values map the fiber at the last vertex to the first.

Serialization sorts object keys, lists simplices in ascending order, writes
numeric arrays on one line and floats with 17 significant digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from dvbc.bundle import Bundle, BundleError, GaugeTransform, Metric, new_bundle
from dvbc.cochain import CochainError, HomCochain, ScalarCochain, VBCochain
from dvbc.complex import ComplexError, SimplicialComplex, build_complex

FORMAT_VERSION = 1
SECTIONS = ("format", "complex", "bundle", "metric", "cochains", "gauge")
COCHAIN_TYPES = ("scalar", "vector", "hom")


class DocumentError(ValueError):
    """Syntax or semantic problem in a document; ``key`` locates it."""

    def __init__(self, key: str, message: str, line: int | None = None, column: int | None = None):
        self.key, self.line, self.column = key, line, column
        where = f"line {line}, column {column}" if line is not None else key
        super().__init__(f"{where}: {message}")


@dataclass
class Document:
    complex: SimplicialComplex | None = None
    bundle: Bundle | None = None
    inverses: dict = field(default_factory=dict)
    metric: Metric | None = None
    cochains: dict = field(default_factory=dict)
    gauge: GaugeTransform | None = None


# -- parsing -----------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _int(x, key: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise DocumentError(key, f"expected an integer, got {json.dumps(x)}")
    return x


def _obj(x, key: str) -> dict:
    if not isinstance(x, dict):
        raise DocumentError(key, "expected an object")
    return x


def _list(x, key: str) -> list:
    if not isinstance(x, list):
        raise DocumentError(key, "expected an array")
    return x


def _only(d: dict, allowed: tuple, key: str) -> None:
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise DocumentError(f"{key}.{extra[0]}", "unknown key")


def _require(d: dict, name: str, key: str):
    if name not in d:
        raise DocumentError(f"{key}.{name}", "missing")
    return d[name]


def _vector(x, key: str, n: int | None = None) -> np.ndarray:
    row = _list(x, key)
    for c, v in enumerate(row):
        if not _is_number(v):
            raise DocumentError(f"{key}[{c}]", f"expected a number, got {json.dumps(v)}")
    if n is not None and len(row) != n:
        raise DocumentError(key, f"length {len(row)}, expected {n}")
    return np.array(row, dtype=float)


def _matrix(x, key: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    rows = _list(x, key)
    if not rows:
        raise DocumentError(key, "empty matrix")
    width = len(_list(rows[0], f"{key}[0]"))
    out = []
    for r, row in enumerate(rows):
        vec = _vector(row, f"{key}[{r}]")
        if len(vec) != width:
            raise DocumentError(key, f"row {r} has length {len(vec)}, expected {width}")
        out.append(vec)
    m = np.array(out)
    if shape is not None and m.shape != shape:
        raise DocumentError(key, f"shape {m.shape[0]}x{m.shape[1]}, expected {shape[0]}x{shape[1]}")
    return m


def _simplex(x, key: str, X: SimplicialComplex, k: int | None = None) -> tuple[int, ...]:
    verts = tuple(_int(v, key) for v in _list(x, key))
    if any(a >= b for a, b in zip(verts, verts[1:])):
        raise DocumentError(key, f"{list(verts)} is not in ascending order")
    if k is not None and len(verts) != k + 1:
        raise DocumentError(key, f"{list(verts)} is not a {k}-simplex")
    if verts not in X:
        raise DocumentError(key, f"{list(verts)} is not a simplex of the complex")
    return verts


def _parse_complex(sec, key: str = "complex") -> SimplicialComplex:
    sec = _obj(sec, key)
    _only(sec, ("cells",), key)
    cells = _list(_require(sec, "cells", key), f"{key}.cells")
    parsed = [[_int(v, f"{key}.cells[{c}]") for v in _list(cell, f"{key}.cells[{c}]")] for c, cell in enumerate(cells)]
    try:
        return build_complex(parsed)
    except ComplexError as exc:
        raise DocumentError(f"{key}.cells", str(exc)) from None


def _parse_dims(x, X: SimplicialComplex, key: str) -> dict[int, int]:
    if _is_number(x):
        n = _int(x, key)
        dims = {v: n for v in X.vertices}
    else:
        d = _obj(x, key)
        dims = {}
        for v, n in d.items():
            try:
                vid = int(v)
            except ValueError:
                raise DocumentError(f"{key}.{v}", "vertex ids must be integers") from None
            if vid not in X.vertices:
                raise DocumentError(f"{key}.{v}", "no such vertex")
            dims[vid] = _int(n, f"{key}.{v}")
        missing = sorted(X.vertices - set(dims))
        if missing:
            raise DocumentError(key, f"no fiber dimension for vertex {missing[0]}")
    for v, n in dims.items():
        if n < 1:
            raise DocumentError(key, f"fiber dimension at vertex {v} must be positive")
    return dims


def _parse_bundle(sec, X: SimplicialComplex) -> tuple[Bundle, dict]:
    sec = _obj(sec, "bundle")
    _only(sec, ("dim", "transports"), "bundle")
    dims = _parse_dims(_require(sec, "dim", "bundle"), X, "bundle.dim")
    transports, inverses = {}, {}
    for t, entry in enumerate(_list(_require(sec, "transports", "bundle"), "bundle.transports")):
        key = f"bundle.transports[{t}]"
        entry = _obj(entry, key)
        _only(entry, ("edge", "matrix", "inverse"), key)
        e = _simplex(_require(entry, "edge", key), f"{key}.edge", X, 1)
        if e in transports:
            raise DocumentError(f"{key}.edge", f"duplicate edge {list(e)}")
        i, j = e
        transports[e] = _matrix(_require(entry, "matrix", key), f"{key}.matrix", (dims[i], dims[j]))
        if "inverse" in entry:
            inverses[e] = _matrix(entry["inverse"], f"{key}.inverse", (dims[j], dims[i]))
    for e in X.edges:
        if e not in transports:
            raise DocumentError("bundle.transports", f"missing transport for edge {list(e)}")
    try:
        E = new_bundle(X, dims, transports, inverses=inverses, strict=False)
    except BundleError as exc:
        raise DocumentError("bundle.transports", str(exc)) from None
    return E, inverses


def _parse_vertex_matrices(x, key: str, E: Bundle) -> dict[int, np.ndarray]:
    out = {}
    for idx, entry in enumerate(_list(x, key)):
        k = f"{key}[{idx}]"
        entry = _obj(entry, k)
        _only(entry, ("vertex", "matrix"), k)
        v = _int(_require(entry, "vertex", k), f"{k}.vertex")
        if v not in E.dim:
            raise DocumentError(f"{k}.vertex", f"no such vertex {v}")
        if v in out:
            raise DocumentError(f"{k}.vertex", f"duplicate vertex {v}")
        n = E.dim[v]
        out[v] = _matrix(_require(entry, "matrix", k), f"{k}.matrix", (n, n))
    missing = sorted(set(E.dim) - set(out))
    if missing:
        raise DocumentError(key, f"no matrix for vertex {missing[0]}")
    return out


def _parse_cochain(name: str, sec, doc: Document):
    key = f"cochains.{name}"
    sec = _obj(sec, key)
    _only(sec, ("type", "degree", "values"), key)
    kind = _require(sec, "type", key)
    if kind not in COCHAIN_TYPES:
        raise DocumentError(f"{key}.type", f"expected one of {', '.join(COCHAIN_TYPES)}")
    k = _int(_require(sec, "degree", key), f"{key}.degree")
    X = doc.complex
    if kind != "scalar" and doc.bundle is None:
        raise DocumentError(key, f"{kind} cochain needs a bundle section")
    vals = {}
    for idx, entry in enumerate(_list(_require(sec, "values", key), f"{key}.values")):
        ek = f"{key}.values[{idx}]"
        entry = _obj(entry, ek)
        _only(entry, ("simplex", "value"), ek)
        s = _simplex(_require(entry, "simplex", ek), f"{ek}.simplex", X, k)
        if s in vals:
            raise DocumentError(f"{ek}.simplex", f"duplicate simplex {list(s)}")
        raw = _require(entry, "value", ek)
        if kind == "scalar":
            if not _is_number(raw):
                raise DocumentError(f"{ek}.value", "expected a number")
            vals[s] = float(raw)
        elif kind == "vector":
            vals[s] = _vector(raw, f"{ek}.value", doc.bundle.dim[s[0]])
        else:
            vals[s] = _matrix(raw, f"{ek}.value", (doc.bundle.dim[s[0]], doc.bundle.dim[s[-1]]))
    try:
        if kind == "scalar":
            return ScalarCochain(X, k, vals)
        if kind == "vector":
            return VBCochain(doc.bundle, k, vals)
        return HomCochain(doc.bundle, k, vals)
    except CochainError as exc:
        raise DocumentError(key, str(exc)) from None


def from_data(data: Any) -> Document:
    data = _obj(data, "document")
    _only(data, SECTIONS, "document")
    version = _require(data, "format", "document")
    if version != FORMAT_VERSION:
        raise DocumentError("format", f"unsupported format {json.dumps(version)}, expected {FORMAT_VERSION}")
    doc = Document()
    for sec in ("bundle", "metric", "cochains", "gauge"):
        if sec in data and "complex" not in data:
            raise DocumentError(sec, "needs a complex section")
    if "complex" in data:
        doc.complex = _parse_complex(data["complex"])
    for sec in ("metric", "gauge"):
        if sec in data and "bundle" not in data:
            raise DocumentError(sec, "needs a bundle section")
    if "bundle" in data:
        doc.bundle, doc.inverses = _parse_bundle(data["bundle"], doc.complex)
    if "metric" in data:
        sec = _obj(data["metric"], "metric")
        _only(sec, ("gram",), "metric")
        grams = _parse_vertex_matrices(_require(sec, "gram", "metric"), "metric.gram", doc.bundle)
        try:
            doc.metric = Metric(grams)
        except BundleError as exc:
            raise DocumentError("metric.gram", str(exc)) from None
    if "gauge" in data:
        mats = _parse_vertex_matrices(data["gauge"], "gauge", doc.bundle)
        try:
            doc.gauge = GaugeTransform(mats)
        except BundleError as exc:
            raise DocumentError("gauge", str(exc)) from None
    if "cochains" in data:
        for name in sorted(_obj(data["cochains"], "cochains")):
            doc.cochains[name] = _parse_cochain(name, data["cochains"][name], doc)
    return doc


def parse(text: str) -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("document", exc.msg, exc.lineno, exc.colno) from None
    return from_data(data)


# -- serialization -----------------------------------------------------------


def _number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    if x == 0.0:
        x = 0.0
    return "%.17g" % x


def _is_numeric_tree(x) -> bool:
    if isinstance(x, (list, tuple)):
        return all(_is_numeric_tree(v) for v in x)
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def emit(x, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {emit(x[k], indent + 1)}" for k in sorted(x, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, (list, tuple)):
        if _is_numeric_tree(x):
            return "[" + ", ".join(emit(v) for v in x) + "]"
        return "[\n" + ",\n".join(inner + emit(v, indent + 1) for v in x) + "\n" + pad + "]"
    if isinstance(x, str):
        return json.dumps(x)
    return _number(x)


def _cochain_data(c) -> dict:
    if isinstance(c, ScalarCochain):
        kind = "scalar"
        render = float
    elif isinstance(c, VBCochain):
        kind = "vector"
        render = np.asarray
    elif isinstance(c, HomCochain):
        kind = "hom"
        render = np.asarray
    else:
        raise TypeError(f"cannot serialize {type(c).__name__}")
    keys = sorted(c.values)
    return {
        "type": kind,
        "degree": c.degree,
        "values": [{"simplex": list(s), "value": render(c.values[s])} for s in keys],
    }


def to_data(doc: Document) -> dict:
    data: dict[str, Any] = {"format": FORMAT_VERSION}
    if doc.complex is not None:
        data["complex"] = {"cells": [list(s) for s in doc.complex.maximal_simplices()]}
    if doc.bundle is not None:
        E = doc.bundle
        dims = set(E.dim.values())
        entries = []
        for e in E.edges():
            entry = {"edge": list(e), "matrix": E.stored[e]}
            if e in doc.inverses:
                entry["inverse"] = doc.inverses[e]
            entries.append(entry)
        data["bundle"] = {
            "dim": dims.pop() if len(dims) == 1 else {str(v): E.dim[v] for v in sorted(E.dim)},
            "transports": entries,
        }
    if doc.metric is not None:
        data["metric"] = {"gram": [{"vertex": v, "matrix": doc.metric[v]} for v in sorted(doc.metric.gram)]}
    if doc.gauge is not None:
        data["gauge"] = [{"vertex": v, "matrix": doc.gauge[v]} for v in sorted(doc.gauge.g)]
    if doc.cochains:
        data["cochains"] = {name: _cochain_data(c) for name, c in doc.cochains.items()}
    return data


def serialize(doc: Document) -> str:
    return emit(to_data(doc)) + "\n"
