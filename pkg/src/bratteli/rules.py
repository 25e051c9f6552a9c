"""Level-indexed generation rules for infinite diagram families.

A rule produces the incidence matrix for every level from ``from_level``
on.  Three kinds cover the catalog: constant-shape matrices of polynomial
entries, the binomial band with one extra vertex per level, and the
growing band family with a polynomial diagonal.  Rules expose just enough
symbolic structure (equal-row-sum polynomial, entry polynomials) for the
criteria modules to run exact degree tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemaError, StructureError
from .polyrat import N, Poly, parse_expression


def _coerce_poly(entry) -> Poly:
    if isinstance(entry, Poly):
        return entry
    if isinstance(entry, int):
        return Poly.const(entry)
    return parse_expression(entry)


class DiagramRule:
    """Interface: shape(n) and matrix(n) for each covered level n."""

    from_level: int = 1

    def shape(self, n: int) -> tuple[int, int]:
        raise NotImplementedError

    def matrix(self, n: int) -> tuple:
        raise NotImplementedError

    def entry_polys(self):
        """Constant-shape entry polynomials, or None when the shape grows."""
        return None

    def ers_row_sum(self):
        """Row-sum polynomial when every row sum is the same, else None."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def _evaluated(self, n, rows):
        out = []
        for row in rows:
            vals = []
            for p in row:
                v = p(n)
                if v.denominator != 1 or v < 0:
                    raise StructureError(
                        f"rule entry {p} evaluates to {v} at level {n}")
                vals.append(int(v))
            out.append(tuple(vals))
        return tuple(out)


@dataclass(frozen=True)
class ExpressionRule(DiagramRule):
    """Constant-shape matrix whose entries are polynomials in the level."""

    entries: tuple        # tuple of tuples of Poly
    from_level: int = 1

    @staticmethod
    def from_strings(rows, from_level=1) -> "ExpressionRule":
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise SchemaError("rule entries must form a rectangular matrix")
        entries = tuple(tuple(_coerce_poly(e) for e in row) for row in rows)
        return ExpressionRule(entries, from_level)

    def shape(self, n):
        return len(self.entries), len(self.entries[0])

    def matrix(self, n):
        return self._evaluated(n, self.entries)

    def entry_polys(self):
        return self.entries

    def ers_row_sum(self):
        sums = [sum(row, Poly()) for row in self.entries]
        first = sums[0]
        if all((s - first).is_zero for s in sums[1:]):
            return first
        return None

    def to_json(self):
        return {
            "shape": "constant",
            "rows": len(self.entries),
            "cols": len(self.entries[0]),
            "from_level": self.from_level,
            "entries": [[str(p) for p in row] for row in self.entries],
        }


@dataclass(frozen=True)
class PascalRule(DiagramRule):
    """Binomial band: level n has n+1 vertices, each connected to its one
    or two neighbours above with multiplicity one."""

    from_level: int = 1

    def shape(self, n):
        return n + 2, n + 1

    def matrix(self, n):
        rows, cols = self.shape(n)
        return tuple(
            tuple(1 if i in (k - 1, k) else 0 for i in range(cols))
            for k in range(rows))

    def to_json(self):
        return {"shape": "pascal", "from_level": self.from_level}


@dataclass(frozen=True)
class ChainRule(DiagramRule):
    """Growing band with polynomial diagonal a(n): level n has n+1
    vertices, the (n+2) x (n+1) matrix has a(n) on the diagonal, a(n) in
    the last position of the extra bottom row, and ones elsewhere.  Every
    row sums to a(n) + n."""

    diag: Poly
    from_level: int = 1

    @staticmethod
    def from_string(a, from_level=1) -> "ChainRule":
        return ChainRule(_coerce_poly(a), from_level)

    def shape(self, n):
        return n + 2, n + 1

    def matrix(self, n):
        rows, cols = self.shape(n)
        a = self.diag(n)
        if a.denominator != 1 or a < 1:
            raise StructureError(
                f"diagonal expression {self.diag} evaluates to {a} at {n}")
        a = int(a)
        out = []
        for k in range(rows):
            diag_col = k if k < cols else cols - 1
            out.append(tuple(a if i == diag_col else 1 for i in range(cols)))
        return tuple(out)

    def ers_row_sum(self):
        return self.diag + N

    def to_json(self):
        return {"shape": "chain", "from_level": self.from_level,
                "entries": [[str(self.diag)]]}


def rule_from_json(doc: dict) -> DiagramRule:
    if not isinstance(doc, dict) or "shape" not in doc:
        raise SchemaError("rule section must be an object with a 'shape'")
    shape = doc["shape"]
    from_level = doc.get("from_level", 1)
    if not isinstance(from_level, int) or from_level < 1:
        raise SchemaError("rule.from_level must be a positive integer")
    if shape == "constant":
        entries = doc.get("entries")
        if not isinstance(entries, list):
            raise SchemaError("constant rule needs an 'entries' matrix")
        rule = ExpressionRule.from_strings(entries, from_level)
        rows, cols = rule.shape(from_level)
        if doc.get("rows", rows) != rows or doc.get("cols", cols) != cols:
            raise SchemaError("declared rule shape disagrees with entries")
        return rule
    if shape == "pascal":
        return PascalRule(from_level)
    if shape == "chain":
        entries = doc.get("entries")
        if not (isinstance(entries, list) and entries and entries[0]):
            raise SchemaError("chain rule needs entries [[diagonal expr]]")
        return ChainRule.from_string(entries[0][0], from_level)
    raise SchemaError(f"unknown rule shape {shape!r}")
