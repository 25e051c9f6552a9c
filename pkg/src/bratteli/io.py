"""Reading and writing the JSON document formats.

Diagram file:
    { "name": str?, "root_edges": [int, ...],
      "levels": [ [[int, ...], ...], ... ]?,
      "rule": { "from_level": int, "shape": "constant"|"pascal"|"chain",
                "rows": int?, "cols": int?, "entries": [[expr, ...], ...]? }?,
      "order": { "scheme": "consecutive"|"reverse"|"explicit", "data"?: ... }? }

Measure file:
    { "diagram": str?, "q": [ ["p/q", ...], ... ] }   (vectors from level 1)

Subdiagram spec file:
    { "kind": "vertex", "W": [[int, ...], ...] | {"scheme": "constant",
      "vertices": [...]} | {"scheme": "settle", "vertex": i} }
    { "kind": "edge", "G": [ [[int, ...], ...], ... ] }

Partition file:
    { "sets": [[int, ...], ...], "zero": [int, ...]? }                  or
    { "blocks": [ {"level": n, "sets": [[...], ...], "zero": [...]?}, ... ] }

All rationals are serialized as "p/q" strings, floats with 12 significant
digits, so reports are byte-identical across runs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .diagram import BratteliDiagram
from .errors import SchemaError
from .rules import rule_from_json

_ORDER_SCHEMES = ("consecutive", "reverse", "explicit")


def _as_document(source) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level JSON value must be an object")
    return doc


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise SchemaError(f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational string {value!r}") from exc
    raise SchemaError(f"expected a rational, got {value!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def load_diagram(source) -> BratteliDiagram:
    """Load and fully validate a diagram document (path or dict)."""
    doc = _as_document(source)
    root = doc.get("root_edges")
    if not isinstance(root, list) or not root or \
            not all(isinstance(x, int) and not isinstance(x, bool) for x in root):
        raise SchemaError("'root_edges' must be a non-empty list of integers")
    levels = doc.get("levels", [])
    if not isinstance(levels, list):
        raise SchemaError("'levels' must be a list of integer matrices")
    for i, m in enumerate(levels):
        if not (isinstance(m, list) and m and
                all(isinstance(r, list) and r for r in m) and
                all(isinstance(x, int) and not isinstance(x, bool)
                    for r in m for x in r)):
            raise SchemaError(f"levels[{i}] is not an integer matrix")
    rule = rule_from_json(doc["rule"]) if doc.get("rule") is not None else None
    order = doc.get("order")
    if order is not None:
        if not isinstance(order, dict) or order.get("scheme") not in _ORDER_SCHEMES:
            raise SchemaError("'order.scheme' must be consecutive|reverse|explicit")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise SchemaError("'name' must be a string")
    return BratteliDiagram(root, levels, rule=rule, name=name, order_spec=order)


def diagram_to_json(d: BratteliDiagram) -> dict:
    doc = {"name": d.name, "root_edges": list(d.root_edges),
           "levels": [[list(r) for r in m] for m in d.prefix]}
    if d.rule is not None:
        doc["rule"] = d.rule.to_json()
    if d.order_spec is not None:
        doc["order"] = d.order_spec
    return doc


def save_diagram(d: BratteliDiagram, path):
    Path(path).write_text(json.dumps(diagram_to_json(d), indent=2,
                                     sort_keys=True) + "\n", encoding="utf-8")


def load_measure(source, diagram: BratteliDiagram | None = None):
    """Load a tower-measure file; returns (diagram, level vectors)."""
    doc = _as_document(source)
    vectors = doc.get("q")
    if not isinstance(vectors, list) or not vectors:
        raise SchemaError("'q' must be a non-empty list of vectors")
    parsed = tuple(tuple(parse_rational(x) for x in vec) for vec in vectors)
    if diagram is None:
        ref = doc.get("diagram")
        if not isinstance(ref, str):
            raise SchemaError("measure file needs a 'diagram' path")
        base = Path(source).parent if not isinstance(source, dict) else Path(".")
        diagram = load_diagram(base / ref)
    return diagram, parsed


def measure_to_json(vectors, diagram_ref: str = "") -> dict:
    return {"diagram": diagram_ref,
            "q": [[format_rational(x) for x in vec] for vec in vectors]}


def load_subdiagram_spec(source):
    from .subdiagram import EdgeSpec, VertexSpec
    doc = _as_document(source)
    kind = doc.get("kind")
    if kind == "vertex":
        w = doc.get("W")
        if isinstance(w, list):
            if not all(isinstance(level, list) and level for level in w):
                raise SchemaError("'W' levels must be non-empty vertex lists")
            return VertexSpec.explicit([tuple(level) for level in w])
        if isinstance(w, dict) and w.get("scheme") == "constant":
            return VertexSpec.constant(tuple(w.get("vertices", ())))
        if isinstance(w, dict) and w.get("scheme") == "settle":
            return VertexSpec.settle(int(w.get("vertex", 0)))
        raise SchemaError("vertex spec needs 'W' as a list or scheme object")
    if kind == "edge":
        g = doc.get("G")
        if not isinstance(g, list) or not g:
            raise SchemaError("edge spec needs 'G' as a list of matrices")
        return EdgeSpec(tuple(tuple(tuple(int(x) for x in row) for row in m)
                              for m in g))
    raise SchemaError("subdiagram 'kind' must be 'vertex' or 'edge'")


def load_partition(source):
    from .criteria import BlockPartition
    doc = _as_document(source)
    if "sets" in doc:
        return BlockPartition.constant(
            [tuple(s) for s in doc["sets"]], tuple(doc.get("zero", ())))
    blocks = doc.get("blocks")
    if not isinstance(blocks, list) or not blocks:
        raise SchemaError("partition file needs 'sets' or 'blocks'")
    by_level = {}
    for item in blocks:
        if not isinstance(item, dict) or "level" not in item or "sets" not in item:
            raise SchemaError("each block entry needs 'level' and 'sets'")
        by_level[int(item["level"])] = ([tuple(s) for s in item["sets"]],
                                        tuple(item.get("zero", ())))
    return BlockPartition.per_level(by_level)
