"""Bratteli diagrams: validated level structure in exact arithmetic.

A diagram is stored as the root edge vector (edge counts from the single
level-0 vertex into level 1), an explicit prefix of integer incidence
matrices, and an optional generation rule for all deeper levels.  Heights
are big integers, stochastic matrices exact rationals; everything derived
is memoized behind a lock so diagrams can be shared between threads.

Matrix orientation: ``incidence(n)`` has one row per level-(n+1) vertex and
one column per level-n vertex; entry (v, w) counts the parallel edges
between w at level n and v at level n+1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import ArgumentError, DepthError, StructureError
from .linalg import int_mat, mat_mul, mat_vec
from .rules import DiagramRule

_VALIDATION_WINDOW = 8


@dataclass(frozen=True)
class HeightVector:
    """Path counts from the root to each vertex of one level."""

    level: int
    values: tuple


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic form of one incidence matrix: entry (v, w) is
    f(v,w) * h_w(n) / h_v(n+1); every row sums to exactly one."""

    level: int
    entries: tuple


class BratteliDiagram:
    """Immutable diagram with memoized heights and stochastic matrices."""

    def __init__(self, root_edges, prefix=(), rule: DiagramRule | None = None,
                 name: str = "", order_spec=None, validate: bool = True):
        self.root_edges = tuple(int(x) for x in root_edges)
        self.prefix = tuple(int_mat(m) for m in prefix)
        self.rule = rule
        self.name = name
        self.order_spec = order_spec
        self._lock = threading.Lock()
        self._incidence_cache: dict[int, tuple] = {}
        self._heights: dict[int, tuple] = {1: self.root_edges}
        self._stochastic: dict[int, tuple] = {}
        self.connectivity_checked_depth = 0
        if validate:
            self._validate()

    # -- structure ---------------------------------------------------------

    @property
    def max_level(self) -> int | None:
        """Deepest level with known vertices; None when a rule is attached."""
        if self.rule is not None:
            return None
        return len(self.prefix) + 1

    def has_level(self, n: int) -> bool:
        return n >= 0 and (self.max_level is None or n <= self.max_level)

    def num_vertices(self, n: int) -> int:
        if n == 0:
            return 1
        if n == 1:
            return len(self.root_edges)
        if n - 1 <= len(self.prefix):
            return len(self.prefix[n - 2])
        if self.rule is not None and n - 1 >= self.rule.from_level:
            return self.rule.shape(n - 1)[0]
        raise DepthError(f"level {n} is beyond the materializable range")

    def incidence(self, n: int) -> tuple:
        """Integer incidence matrix between levels n and n+1 (n >= 1)."""
        if n < 1:
            raise ArgumentError("incidence matrices are indexed from 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.rule is not None and n >= self.rule.from_level:
            with self._lock:
                cached = self._incidence_cache.get(n)
            if cached is not None:
                return cached
            m = self.rule.matrix(n)
            _check_matrix(m, f"level {n}")
            with self._lock:
                self._incidence_cache[n] = m
            return m
        raise DepthError(f"no incidence matrix for level {n}")

    def heights(self, n: int) -> tuple:
        """h(n): exact path counts from the root, h(n+1) = F(n) h(n)."""
        if n < 1:
            raise ArgumentError("heights are defined for levels >= 1")
        with self._lock:
            known = max(self._heights)
            h = self._heights[min(n, known)]
        for k in range(min(n, known), n):
            h = mat_vec(self.incidence(k), h)
            with self._lock:
                self._heights[k + 1] = h
        return h

    def height_vector(self, n: int) -> HeightVector:
        return HeightVector(n, self.heights(n))

    def stochastic(self, n: int) -> tuple:
        """Row-stochastic incidence matrix for level n, exact rationals."""
        with self._lock:
            cached = self._stochastic.get(n)
        if cached is not None:
            return cached
        f = self.incidence(n)
        h = self.heights(n)
        h_next = self.heights(n + 1)
        rows = []
        for v, row in enumerate(f):
            rows.append(tuple(Fraction(row[w] * h[w], h_next[v])
                              for w in range(len(row))))
        entries = tuple(rows)
        for row in entries:
            if sum(row) != 1:
                raise StructureError(f"stochastic row sum != 1 at level {n}")
        with self._lock:
            self._stochastic[n] = entries
        return entries

    def stochastic_matrix(self, n: int) -> StochasticMatrix:
        return StochasticMatrix(n, self.stochastic(n))

    # -- derived properties --------------------------------------------------

    def ers_row_sums(self, upto: int):
        """Per-level equal row sums r_n for n <= upto, or None if some
        level has unequal row sums."""
        sums = []
        for n in range(1, upto + 1):
            rows = [sum(row) for row in self.incidence(n)]
            if any(s != rows[0] for s in rows):
                return None
            sums.append(rows[0])
        return tuple(sums)

    def is_stationary(self, upto: int = 6) -> bool:
        """True when all materialized/checked levels repeat one square
        matrix (constant-entry rules are stationary by construction)."""
        polys = self.rule.entry_polys() if self.rule is not None else None
        if self.rule is not None:
            if polys is None:
                return False
            if any(p.degree > 0 for row in polys for p in row):
                return False
        first = self.incidence(1)
        if len(first) != len(first[0]):
            return False
        top = upto if self.rule is not None else len(self.prefix)
        return all(self.incidence(n) == first for n in range(2, top + 1))

    def is_simple_to_depth(self, depth: int) -> bool:
        """Evidence of simplicity: from every checked level some deeper
        level is reached by paths from all vertices to all vertices."""
        for n in range(1, depth):
            reach = self.incidence(n)
            m = n
            while any(x == 0 for row in reach for x in row) and m + 1 < depth:
                m += 1
                reach = mat_mul(self.incidence(m), reach)
            if any(x == 0 for row in reach for x in row):
                return False
        return True

    def materialize(self, depth: int) -> tuple:
        """The incidence matrices for levels 1..depth, as a tuple."""
        return tuple(self.incidence(n) for n in range(1, depth + 1))

    # -- operations ----------------------------------------------------------

    def telescope(self, levels) -> "BratteliDiagram":
        """Collapse level ranges by multiplying incidence matrices.

        ``levels`` must be strictly increasing and start at 0.  Retained
        level k of the result is original level levels[k]; heights there,
        and hence all invariant-measure data, are unchanged.
        """
        levels = tuple(int(x) for x in levels)
        if not levels or levels[0] != 0:
            raise ArgumentError("telescoping levels must start at 0")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ArgumentError("telescoping levels must strictly increase")
        if len(levels) < 2:
            raise ArgumentError("telescoping needs at least one retained level")
        root = self.root_edges
        for n in range(1, levels[1]):
            root = mat_vec(self.incidence(n), root)
        new_prefix = []
        for a, b in zip(levels[1:], levels[2:]):
            block = self.incidence(a)
            for n in range(a + 1, b):
                block = mat_mul(self.incidence(n), block)
            new_prefix.append(block)
        return BratteliDiagram(root, new_prefix, rule=None,
                               name=f"{self.name}#tel" if self.name else "")

    # -- validation ----------------------------------------------------------

    def _validate(self):
        if not self.root_edges:
            raise StructureError("empty root edge vector")
        if any(x < 1 for x in self.root_edges):
            raise StructureError("root edges must be positive")
        width = len(self.root_edges)
        for i, m in enumerate(self.prefix):
            _check_matrix(m, f"level {i + 1}")
            if len(m[0]) != width:
                raise StructureError(
                    f"level {i + 1} has {len(m[0])} columns, expected {width}")
            width = len(m)
        if self.rule is not None:
            start = self.rule.from_level
            if start > len(self.prefix) + 1:
                raise StructureError(
                    "rule leaves a gap after the explicit prefix")
            if start <= len(self.prefix):
                raise StructureError(
                    "rule must begin right after the explicit prefix")
            if self.rule.shape(start)[1] != width:
                raise StructureError(
                    "rule shape does not chain onto the prefix")
        depth = len(self.prefix) + 1
        if self.rule is not None:
            depth = max(depth, self.rule.from_level + _VALIDATION_WINDOW)
        self._check_connected(depth)

    def _check_connected(self, depth: int):
        """The standing convention: not a union of disjoint subdiagrams.
        Checked on the materialized levels only."""
        index = {}
        for n in range(1, depth + 1):
            for v in range(self.num_vertices(n)):
                index[(n, v)] = len(index)
        parent = list(range(len(index)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj

        for n in range(1, depth):
            f = self.incidence(n)
            for v, row in enumerate(f):
                for w, count in enumerate(row):
                    if count > 0:
                        union(index[(n, w)], index[(n + 1, v)])
        roots = {find(i) for i in index.values()}
        if len(roots) > 1:
            raise StructureError(
                f"diagram splits into {len(roots)} disjoint parts "
                f"within the first {depth} levels")
        self.connectivity_checked_depth = depth

    def __repr__(self):
        tail = "rule" if self.rule is not None else f"{len(self.prefix)} levels"
        return f"BratteliDiagram({self.name or 'unnamed'}, |V1|={len(self.root_edges)}, {tail})"


def _check_matrix(m, where: str):
    if not m or not m[0]:
        raise StructureError(f"empty incidence matrix at {where}")
    if any(len(row) != len(m[0]) for row in m):
        raise StructureError(f"ragged incidence matrix at {where}")
    if any(x < 0 for row in m for x in row):
        raise StructureError(f"negative edge count at {where}")
    if any(all(x == 0 for x in row) for row in m):
        raise StructureError(f"zero row at {where}")
    for col in range(len(m[0])):
        if all(row[col] == 0 for row in m):
            raise StructureError(f"zero column at {where}")
