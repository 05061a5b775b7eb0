"""Reading and writing the on-disk formats.

Formats: ``gset-json`` (globular sets and maps), ``ptree-json`` (planar
trees as nested arrays), ``operad-json``, ``cell-json`` (cellular sets over
an operad) and ``dot`` (categories of elements).  Writers are deterministic.
Readers raise :class:`FormatError` naming the line or field at fault.
"""
from __future__ import annotations

import json
import os
import re
from typing import IO, Any

import jsonschema

from .globset import GlobularMap, GlobularSet, OmegaError, validate
from .nerve import CellularSet, SmallCategory, Theta, ThetaMap, to_dot
from .operad import Collection, OperadData, builtin
from .tree import MalformedPlanarError, Tree, planar_json, tree

FORMATS = ("gset-json", "ptree-json", "operad-json", "cell-json", "dot")


class FormatError(OmegaError):
    """Input that does not parse against its declared format."""

    def __init__(self, source: str, where: str, msg: str):
        self.source, self.where, self.msg = source, where, msg
        super().__init__(f"{source}: {where}: {msg}" if where else f"{source}: {msg}")


_PTREE = {"type": "array", "items": {"$ref": "#/$defs/ptree"}}
_CELL = {
    "type": "object",
    "required": ["id", "dim"],
    "properties": {
        "id": {"type": "string"},
        "dim": {"type": "integer", "minimum": 0},
        "src": {"type": ["string", "null"]},
        "tgt": {"type": ["string", "null"]},
    },
}
SCHEMAS = {
    "gset-json": {
        "type": "object",
        "required": ["cells"],
        "properties": {"cells": {"type": "array", "items": _CELL}},
    },
    "gset-map": {
        "type": "object",
        "required": ["from", "to", "assign"],
        "properties": {
            "from": {"type": "string"},
            "to": {"type": "string"},
            "assign": {"type": "object", "additionalProperties": {"type": "string"}},
        },
    },
    "ptree-json": {"$defs": {"ptree": _PTREE}, "$ref": "#/$defs/ptree"},
    "operad-json": {
        "$defs": {"ptree": _PTREE},
        "type": "object",
        "required": ["trunc_dim", "tree_bound", "cells", "unit", "mult"],
        "properties": {
            "trunc_dim": {"type": "integer", "minimum": 0},
            "tree_bound": {"type": "integer", "minimum": 1},
            "complete_fibers": {"type": "boolean"},
            "name": {"type": "string"},
            "cells": {
                "type": "array",
                "items": {**_CELL, "required": ["id", "dim", "over"],
                          "properties": {**_CELL["properties"], "over": {"$ref": "#/$defs/ptree"}}},
            },
            "unit": {"type": "object", "additionalProperties": {"type": "string"}},
            "mult": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["outer", "inner", "result"],
                    "properties": {
                        "outer": {"type": "string"},
                        "inner": {"type": "array", "items": {"type": "string"}},
                        "result": {"type": "string"},
                    },
                },
            },
        },
    },
    "cell-json": {
        "type": "object",
        "required": ["operad", "values", "action"],
        "properties": {
            "operad": {"type": "string"},
            "trunc_dim": {"type": "integer", "minimum": 0},
            "bound": {"type": "integer", "minimum": 1},
            "name": {"type": "string"},
            "values": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
            "action": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["hom", "table"],
                    "properties": {
                        "hom": {"type": "string"},
                        "table": {"type": "object", "additionalProperties": {"type": "string"}},
                    },
                },
            },
        },
    },
}


def _decode(text: str, fmt: str, source: str) -> Any:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(source, f"line {e.lineno}, column {e.colno}", e.msg) from None
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(SCHEMAS[fmt]).iter_errors(data))
    if err is not None:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise FormatError(source, f"field {path}", err.message)
    return data


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise FormatError(path, "", e.strerror or str(e)) from None


# -- ptree-json ---------------------------------------------------------------

def dumps_ptree(t: Tree) -> str:
    return planar_json(t.planar)


def loads_ptree(text: str, source: str = "<tree>") -> Tree:
    return tree(_decode(text, "ptree-json", source))


def read_tree(arg: str) -> Tree:
    """A tree given inline as ptree-json, or a path to a ptree-json or gset-json file."""
    text = arg
    source = "<tree>"
    if not arg.lstrip().startswith("[") and os.path.exists(arg):
        text, source = read_text(arg), arg
    data = json.loads(text) if text.lstrip().startswith("{") else None
    if data is not None:
        from .tree import NotATreeError, convert
        g = loads_gset(text, source)
        try:
            return tree(convert(g)[0])
        except NotATreeError as e:
            raise FormatError(source, "", str(e)) from None
    try:
        return loads_ptree(text, source)
    except MalformedPlanarError as e:
        raise FormatError(source, "", str(e)) from None


# -- gset-json ----------------------------------------------------------------

def dumps_gset(g: GlobularSet) -> str:
    lines = [json.dumps({"id": c.id, "dim": c.dim, "src": c.src, "tgt": c.tgt}) for c in g]
    return '{"cells": [\n  ' + ",\n  ".join(lines) + "\n]}\n"


def loads_gset(text: str, source: str = "<gset>") -> GlobularSet:
    data = _decode(text, "gset-json", source)
    seen = set()
    for i, r in enumerate(data["cells"]):
        if r["id"] in seen:
            raise FormatError(source, f"field cells/{i}/id", f"duplicate id {r['id']!r}")
        seen.add(r["id"])
    g = GlobularSet.from_records(data["cells"])
    rep = validate(g)
    if not rep:
        bad = rep.violations[0]
        idx = next((i for i, r in enumerate(data["cells"]) if bad.startswith(f"{r['id']}: ")), None)
        raise FormatError(source, f"field cells/{idx}" if idx is not None else "field cells", bad)
    return g


def read_gset(path: str) -> GlobularSet:
    return loads_gset(read_text(path), path)


def dumps_map(f: GlobularMap, src_path: str, tgt_path: str) -> str:
    return json.dumps({"from": src_path, "to": tgt_path, "assign": {c.id: f(c.id) for c in f.source}}, indent=1) + "\n"


def read_map(path: str) -> GlobularMap:
    data = _decode(read_text(path), "gset-map", path)
    base = os.path.dirname(path)
    x = read_gset(os.path.join(base, data["from"]))
    y = read_gset(os.path.join(base, data["to"]))
    assign = data["assign"]
    for cid in x.ids:
        if cid not in assign:
            raise FormatError(path, f"field assign/{cid}", "cell is not assigned")
    f = GlobularMap(x, y, {c: assign[c] for c in x.ids})
    rep = f.validate()
    if not rep:
        raise FormatError(path, "field assign", rep.violations[0])
    return f


# -- operad-json --------------------------------------------------------------

def write_operad(o: OperadData, fh: IO[str]) -> None:
    """Stream ``o`` as operad-json, one cell or composition entry per line."""
    units = {str(n): o.unit[n] for n in sorted(o.unit)}
    fh.write("{\n")
    fh.write(f' "name": {json.dumps(o.name)},\n')
    fh.write(f' "trunc_dim": {o.coll.trunc_dim},\n "tree_bound": {o.coll.tree_bound},\n')
    fh.write(f' "complete_fibers": {json.dumps(bool(o.complete_fibers))},\n')
    fh.write(f' "unit": {json.dumps(units)},\n')
    fh.write(' "cells": [')
    sep = "\n  "
    for c in o.total:
        over = planar_json(o.over(c.id).planar)
        fh.write(f'{sep}{{"id": {json.dumps(c.id)}, "dim": {c.dim}, "src": {json.dumps(c.src)}, '
                 f'"tgt": {json.dumps(c.tgt)}, "over": {over}}}')
        sep = ",\n  "
    fh.write("\n ],\n")
    fh.write(' "mult": [')
    sep = "\n  "
    for (a, labels), r in o.mult.items():
        fh.write(f'{sep}{{"outer": {json.dumps(a)}, "inner": {json.dumps(list(labels))}, "result": {json.dumps(r)}}}')
        sep = ",\n  "
    fh.write("\n ]\n}\n")


def dumps_operad(o: OperadData) -> str:
    import io
    buf = io.StringIO()
    write_operad(o, buf)
    return buf.getvalue()


def loads_operad(text: str, source: str = "<operad>") -> OperadData:
    data = _decode(text, "operad-json", source)
    try:
        total = loads_gset(json.dumps({"cells": [{k: r.get(k) for k in ("id", "dim", "src", "tgt")}
                                                 for r in data["cells"]]}), source)
    except FormatError as e:
        raise FormatError(source, e.where, e.msg) from None
    over = {}
    for i, r in enumerate(data["cells"]):
        t = tree(r["over"])
        if t.height > r["dim"]:
            raise FormatError(source, f"field cells/{i}/over", f"tree of height {t.height} over a {r['dim']}-cell")
        over[r["id"]] = t
    units = {}
    for k, v in data["unit"].items():
        if not k.isdigit() or v not in total or total.dim(v) != int(k):
            raise FormatError(source, f"field unit/{k}", f"{v!r} is not a {k}-cell")
        units[int(k)] = v
    mult = {}
    for i, m in enumerate(data["mult"]):
        for role, cid in [("outer", m["outer"]), ("result", m["result"])] + [("inner", c) for c in m["inner"]]:
            if cid not in total:
                raise FormatError(source, f"field mult/{i}/{role}", f"unknown operation {cid!r}")
        key = (m["outer"], tuple(m["inner"]))
        if key in mult and mult[key] != m["result"]:
            raise FormatError(source, f"field mult/{i}", "conflicting composite for the same key")
        mult[key] = m["result"]
    coll = Collection(total, over, data["trunc_dim"], data["tree_bound"])
    return OperadData(coll, units, mult, data.get("complete_fibers", True), name=data.get("name", ""))


def read_operad(ref: str, trunc_dim: int = 2, tree_bound: int = 7) -> OperadData:
    """``initial`` or ``terminal`` for the built-in operads, otherwise an operad-json path."""
    if ref in ("initial", "terminal"):
        return builtin(ref, trunc_dim, tree_bound)
    return loads_operad(read_text(ref), ref)


# -- cell-json ----------------------------------------------------------------

def hom_ids(theta: Theta, s: Tree, t: Tree) -> dict[tuple, str]:
    """Stable names ``s>t#k`` for the morphisms ``s -> t``, ``k`` the position in enumeration order."""
    head = f"{planar_json(s.planar)}>{planar_json(t.planar)}#"
    return {f.key(): f"{head}{k}" for k, f in enumerate(theta.hom(s, t))}


def dumps_cellular(x: CellularSet, operad_ref: str) -> str:
    th = x.theta
    names = {t: {y: f"e{i}" for i, y in enumerate(x.at(t))} for t in th.trees}
    out = {
        "operad": operad_ref,
        "trunc_dim": th.o.coll.trunc_dim,
        "bound": th.bound,
        "name": x.name,
        "values": {planar_json(t.planar): list(names[t].values()) for t in th.trees},
        "action": [],
    }
    for s in th.trees:
        for t in th.trees:
            ids = hom_ids(th, s, t)
            for f in th.hom(s, t):
                table = {names[t][y]: names[s][x.restrict(f, y)] for y in x.at(t)}
                out["action"].append({"hom": ids[f.key()], "table": table})
    return json.dumps(out, indent=1) + "\n"


def loads_cellular(text: str, source: str = "<cellular>", base: str = ".") -> CellularSet:
    data = _decode(text, "cell-json", source)
    ref = data["operad"]
    if ref not in ("initial", "terminal"):
        ref = os.path.join(base, ref)
    trunc = data.get("trunc_dim", 2)
    bound = data.get("bound", 5)
    o = read_operad(ref, trunc, bound)
    th = Theta(o, bound)
    values: dict[Tree, list] = {}
    for key, elems in data["values"].items():
        try:
            t = tree(key)
        except (MalformedPlanarError, json.JSONDecodeError):
            raise FormatError(source, f"field values/{key}", "not a ptree-json key") from None
        if t not in th.trees:
            raise FormatError(source, f"field values/{key}", "tree outside the declared bound")
        values[t] = list(elems)
    for t in th.trees:
        if t not in values:
            raise FormatError(source, "field values", f"missing tree {planar_json(t.planar)}")
    tables = {}
    for i, entry in enumerate(data["action"]):
        tables[entry["hom"]] = (i, entry["table"])
    lookup: dict[tuple, dict] = {}
    for s in th.trees:
        for t in th.trees:
            for fkey, hid in hom_ids(th, s, t).items():
                if hid not in tables:
                    raise FormatError(source, "field action", f"no table for morphism {hid}")
                i, table = tables.pop(hid)
                for y in values[t]:
                    img = table.get(y)
                    if img is None or img not in values[s]:
                        raise FormatError(source, f"field action/{i}/table/{y}",
                                          f"missing or unknown image {img!r}")
                lookup[fkey] = table
    if tables:
        hid, (i, _) = min(tables.items(), key=lambda kv: kv[1][0])
        raise FormatError(source, f"field action/{i}/hom", f"unknown morphism {hid!r}")

    def action(f: ThetaMap, y: str) -> str:
        return lookup[f.key()][y]

    return CellularSet(th, values, action, name=data.get("name", ""))


def read_cellular(path: str) -> CellularSet:
    return loads_cellular(read_text(path), path, os.path.dirname(path) or ".")


# -- dot ----------------------------------------------------------------------

def dumps_dot(c: SmallCategory, name: str = "elements") -> str:
    return to_dot(c, name)


_NODE = re.compile(r'^\s*(\w+)\s*\[label="([^"]*)"\];\s*$')
_EDGE = re.compile(r"^\s*(\w+)\s*->\s*(\w+)\s*;\s*$")


def loads_dot(text: str, source: str = "<dot>") -> tuple[dict[str, str], list[tuple[str, str]]]:
    """Parse the DOT subset written by :func:`dumps_dot` into nodes and edges."""
    lines = text.splitlines()
    if not lines or not re.match(r"^digraph \w+ \{$", lines[0]) or lines[-1] != "}":
        raise FormatError(source, "line 1", "expected 'digraph NAME {' ... '}'")
    nodes, edges = {}, []
    for i, line in enumerate(lines[1:-1], start=2):
        if m := _NODE.match(line):
            nodes[m.group(1)] = m.group(2)
        elif m := _EDGE.match(line):
            for n in m.groups():
                if n not in nodes:
                    raise FormatError(source, f"line {i}", f"edge mentions undeclared node {n}")
            edges.append(m.groups())
        else:
            raise FormatError(source, f"line {i}", "neither a node nor an edge statement")
    return nodes, edges


# -- dispatch -----------------------------------------------------------------

def dumps(value, fmt: str, **kw) -> str:
    if fmt == "ptree-json":
        return dumps_ptree(value)
    if fmt == "gset-json":
        return dumps_gset(value)
    if fmt == "operad-json":
        return dumps_operad(value)
    if fmt == "cell-json":
        return dumps_cellular(value, kw.get("operad_ref", "terminal"))
    if fmt == "dot":
        return dumps_dot(value, kw.get("name", "elements"))
    raise ValueError(f"unknown format {fmt!r}")


def loads(text: str, fmt: str, source: str = "<input>", **kw):
    if fmt == "ptree-json":
        return loads_ptree(text, source)
    if fmt == "gset-json":
        return loads_gset(text, source)
    if fmt == "operad-json":
        return loads_operad(text, source)
    if fmt == "cell-json":
        return loads_cellular(text, source, kw.get("base", "."))
    if fmt == "dot":
        return loads_dot(text, source)
    raise ValueError(f"unknown format {fmt!r}")
