"""Edge orderings, extremal paths, the successor map, orbit statistics.

An ordering ranks the incoming edges of every vertex.  The successor map
increments the shallowest non-maximal edge of a path and resets everything
below it to the minimal path into the new source; iterating it on the
depth-N truncation enumerates the paths into each terminal vertex in
lexicographic order.  Wrapping the truncation's maximal prefixes onto its
minimal ones (cyclically, in terminal-vertex order) closes the finite
system into a single cycle per run, so Birkhoff frequencies of cylinders
can be read off directly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .diagram import BratteliDiagram
from .errors import ArgumentError, DepthError, MaximalPathError, SchemaError

_SCHEMES = ("consecutive", "reverse", "explicit")


class EdgeOrder:
    """Total order on the incoming edges of every vertex.

    Edges into vertex v at level n are pairs (source, slot); consecutive
    order sorts them by source then slot, reverse inverts that, explicit
    orders come from the diagram file.
    """

    def __init__(self, diagram: BratteliDiagram, scheme: str = "consecutive",
                 data=None):
        if scheme not in _SCHEMES:
            raise ArgumentError(f"unknown order scheme {scheme!r}")
        self.diagram = diagram
        self.scheme = scheme
        self.data = data
        self._cache: dict = {}
        self._lock = threading.Lock()

    @staticmethod
    def from_spec(diagram: BratteliDiagram, spec=None) -> "EdgeOrder":
        spec = spec if spec is not None else diagram.order_spec
        if spec is None:
            return EdgeOrder(diagram)
        return EdgeOrder(diagram, spec.get("scheme", "consecutive"),
                         spec.get("data"))

    def in_edges(self, level: int, v: int) -> tuple:
        """Incoming edges of (level, v) in increasing order."""
        key = (level, v)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        if level == 1:
            base = [(0, j) for j in range(self.diagram.root_edges[v])]
        else:
            f = self.diagram.incidence(level - 1)
            base = [(w, j) for w in range(len(f[v]))
                    for j in range(f[v][w])]
        if self.scheme == "reverse":
            base = base[::-1]
        elif self.scheme == "explicit":
            base = self._explicit(level, v, base)
        edges = tuple(base)
        with self._lock:
            self._cache[key] = edges
        return edges

    def _explicit(self, level, v, base):
        try:
            ranks = self.data[str(level)][v]
        except (KeyError, IndexError, TypeError):
            raise SchemaError(
                f"explicit order data missing for level {level} vertex {v}")
        listed = [tuple(e) for e in ranks]
        if sorted(listed) != sorted(base):
            raise SchemaError(
                f"explicit order at level {level} vertex {v} is not a "
                "permutation of the incoming edges")
        return listed

    def rank(self, level: int, v: int, edge) -> int:
        return self.in_edges(level, v).index(tuple(edge))


@dataclass(frozen=True)
class PathPrefix:
    """Finite path from the root: visited vertices v_1..v_N and, per level,
    the slot of the chosen edge among the parallel edges (source, slot)."""

    vertices: tuple
    slots: tuple

    def __post_init__(self):
        if len(self.vertices) != len(self.slots):
            raise ArgumentError("vertices and slots must align")

    def __len__(self):
        return len(self.vertices)

    def edge(self, k: int) -> tuple:
        """The level-k edge as (source, slot); the root is vertex 0."""
        source = 0 if k == 0 else self.vertices[k - 1]
        return (source, self.slots[k])

    def starts_with(self, other: "PathPrefix") -> bool:
        n = len(other)
        return self.vertices[:n] == other.vertices and \
            self.slots[:n] == other.slots


def validate_prefix(d: BratteliDiagram, p: PathPrefix):
    for k, v in enumerate(p.vertices):
        source, slot = p.edge(k)
        count = d.root_edges[v] if k == 0 else d.incidence(k)[v][source]
        if not 0 <= slot < count:
            raise ArgumentError(f"slot {slot} out of range at level {k + 1}")


def extremal_path_to(d: BratteliDiagram, order: EdgeOrder, level: int,
                     v: int, minimal: bool = True) -> PathPrefix:
    """The unique all-minimal (or all-maximal) path into one vertex."""
    vertices, slots = [], []
    current = v
    for lvl in range(level, 0, -1):
        edges = order.in_edges(lvl, current)
        source, slot = edges[0] if minimal else edges[-1]
        vertices.append(current)
        slots.append(slot)
        current = source
    return PathPrefix(tuple(reversed(vertices)), tuple(reversed(slots)))


def extremal_prefixes(d: BratteliDiagram, order: EdgeOrder, depth: int,
                      minimal: bool = True, lookahead: int = 8):
    """Extremal prefixes that extend to deeper extremal paths.

    Every vertex carries one all-minimal path, but only those in the image
    of the extremal-source maps from deeper levels continue to infinite
    extremal paths; the image is computed ``lookahead`` levels down (capped
    at the materializable depth)."""
    top = depth + lookahead
    if d.max_level is not None:
        top = min(top, d.max_level)
    if top < depth:
        raise DepthError(f"diagram too shallow for depth {depth}")
    survivors = set(range(d.num_vertices(top)))
    for lvl in range(top, depth, -1):
        survivors = {order.in_edges(lvl, v)[0 if minimal else -1][0]
                     for v in survivors}
    return [extremal_path_to(d, order, depth, v, minimal)
            for v in sorted(survivors)]


def all_extremal_prefixes(d, order, depth, minimal=True):
    """One extremal prefix per terminal vertex (no extension filtering)."""
    return [extremal_path_to(d, order, depth, v, minimal)
            for v in range(d.num_vertices(depth))]


def successor(d: BratteliDiagram, order: EdgeOrder,
              p: PathPrefix) -> PathPrefix:
    """Increment the shallowest non-maximal edge and reset everything
    below it to the minimal path into the new source."""
    for k in range(len(p)):
        level = k + 1
        v = p.vertices[k]
        edges = order.in_edges(level, v)
        r = order.rank(level, v, p.edge(k))
        if r + 1 < len(edges):
            source, slot = edges[r + 1]
            if k == 0:
                head_vertices, head_slots = (), ()
            else:
                head = extremal_path_to(d, order, k, source, minimal=True)
                head_vertices, head_slots = head.vertices, head.slots
            return PathPrefix(head_vertices + p.vertices[k:],
                              head_slots + (slot,) + p.slots[k + 1:])
    raise MaximalPathError("the prefix is maximal; wrap to a minimal path")


@dataclass(frozen=True)
class OrbitStats:
    steps: int
    wraps: int
    cylinders: tuple
    counts: tuple
    frequencies: tuple          # exact counts / steps
    window_rows: tuple = ()     # (step, per-cylinder running frequency)


def orbit_frequencies(d: BratteliDiagram, order: EdgeOrder,
                      start: PathPrefix, steps: int, cylinders,
                      window: int = 0) -> OrbitStats:
    """Visit frequencies of cylinder prefixes along the truncated orbit.

    The truncation wraps each maximal prefix to the minimal prefix of the
    cyclically next terminal vertex (in vertex order), which joins the
    per-vertex lexicographic cycles into one; wrap events are counted so
    callers can bound the truncation bias.
    """
    depth = len(start)
    validate_prefix(d, start)
    cylinders = [c if isinstance(c, PathPrefix) else PathPrefix(*c)
                 for c in cylinders]
    if any(len(c) > depth for c in cylinders):
        raise ArgumentError("cylinders must be shorter than the truncation")
    k = d.num_vertices(depth)
    mins = {v: extremal_path_to(d, order, depth, v, True) for v in range(k)}
    wrap_to = {v: mins[(v + 1) % k] for v in range(k)}

    counts = [0] * len(cylinders)
    wraps = 0
    rows = []
    current = start
    for step in range(steps):
        for idx, cyl in enumerate(cylinders):
            if current.starts_with(cyl):
                counts[idx] += 1
        if window and (step + 1) % window == 0:
            rows.append((step + 1,
                         tuple(Fraction(c, step + 1) for c in counts)))
        try:
            current = successor(d, order, current)
        except MaximalPathError:
            current = wrap_to[current.vertices[-1]]
            wraps += 1
    freqs = tuple(Fraction(c, steps) for c in counts)
    return OrbitStats(steps, wraps, tuple(cylinders), tuple(counts), freqs,
                      tuple(rows))


def enumerate_cylinders(d: BratteliDiagram, level: int):
    """All edge prefixes of the given length, in lexicographic vertex/slot
    order."""
    out = [PathPrefix((), ())]
    for lvl in range(1, level + 1):
        nxt = []
        for p in out:
            source = 0 if lvl == 1 else p.vertices[-1]
            for v in range(d.num_vertices(lvl)):
                count = d.root_edges[v] if lvl == 1 \
                    else d.incidence(lvl - 1)[v][source]
                for slot in range(count):
                    nxt.append(PathPrefix(p.vertices + (v,),
                                          p.slots + (slot,)))
        out = nxt
    return out


def order_diagnostics(d: BratteliDiagram, order: EdgeOrder,
                      depth: int = 8) -> dict:
    """Counts of surviving extremal prefixes per level, the necessary
    perfectness condition (equal max and min counts), and properness
    evidence (both counts equal one everywhere)."""
    min_counts, max_counts = {}, {}
    for lvl in range(1, depth + 1):
        min_counts[lvl] = len(extremal_prefixes(d, order, lvl, True))
        max_counts[lvl] = len(extremal_prefixes(d, order, lvl, False))
    balanced = min_counts[depth] == max_counts[depth]
    proper = balanced and all(c == 1 for c in min_counts.values()) and \
        all(c == 1 for c in max_counts.values())
    return {
        "depth": depth,
        "min_counts": min_counts,
        "max_counts": max_counts,
        "necessary_condition_holds": balanced,
        "properness_evidence": proper,
    }
