"""Deterministic report documents.

Reports are plain dicts rendered with sorted keys; rationals appear as
"p/q" strings and floats with 12 significant digits, so identical inputs
and flags produce byte-identical output.  Every verdict that is not
Proved or Refuted contributes a depth-limited warning.
"""

from __future__ import annotations

import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

from . import __version__
from .verdict import Status, Verdict


def jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, Verdict):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return obj


def input_digest(path) -> str:
    data = Path(path).read_bytes()
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _collect_warnings(sections, prefix=""):
    warnings = []
    if isinstance(sections, Verdict):
        if sections.status not in (Status.PROVED, Status.REFUTED):
            warnings.append(
                f"depth-limited: {prefix or 'verdict'} is "
                f"{sections.status.value}, not a proof")
        return warnings
    if isinstance(sections, dict):
        for key, value in sections.items():
            warnings.extend(_collect_warnings(
                value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(sections, (list, tuple)):
        for idx, value in enumerate(sections):
            warnings.extend(_collect_warnings(value, f"{prefix}[{idx}]"))
    return warnings


def report_document(command: str, arguments: dict, sections: dict,
                    digest: str | None = None, extra_warnings=()) -> dict:
    warnings = list(extra_warnings) + _collect_warnings(sections)
    return {
        "tool": "bk",
        "version": __version__,
        "command": command,
        "arguments": jsonable(arguments),
        "input_digest": digest,
        "sections": jsonable(sections),
        "warnings": warnings,
    }


def render_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, Fraction):
                cells.append(f"{cell.numerator}/{cell.denominator}")
            elif isinstance(cell, float):
                cells.append(f"{cell:.12g}")
            else:
                cells.append(str(cell))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
