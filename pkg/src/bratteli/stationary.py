"""Stationary diagrams: vertex classes, certified spectral radii, measures.

For a diagram repeating one incidence matrix, the communication classes of
the matrix (edge v -> w whenever the (v, w) entry is positive) order
themselves by reachability.  A class whose spectral radius strictly
dominates every class below it carries a finite ergodic measure built from
its non-negative left eigenvector; every other class carries an infinite
measure that is finite exactly on the towers of its own vertices.

Radii are certified: min/max row quotients of iterated powers give exact
rational brackets, and an integer radius detected inside a bracket makes
the entire measure table exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .diagram import BratteliDiagram
from .errors import (ArgumentError, ConvergenceError, InconclusiveError)
from .linalg import det, mat_vec, nullspace, transpose
from .measures import TowerMeasure


@dataclass(frozen=True)
class ClassDecomposition:
    """Strongly connected classes of the incidence graph with their
    reachability order and a block-triangularizing vertex order."""

    matrix: tuple
    classes: tuple            # tuple of sorted vertex tuples
    reaches: tuple            # pairs (a, b): class a strictly reaches class b
    permutation: tuple        # vertex order putting the matrix in
                              # block-lower-triangular form

    def class_of(self, v: int) -> int:
        for idx, cls in enumerate(self.classes):
            if v in cls:
                return idx
        raise ArgumentError(f"vertex {v} outside the decomposition")

    def below(self, idx: int) -> tuple:
        """Classes strictly reachable from the given class."""
        return tuple(b for a, b in self.reaches if a == idx)

    def reachable_vertices(self, idx: int) -> tuple:
        """Vertices of the class and of every class it reaches."""
        out = set(self.classes[idx])
        for b in self.below(idx):
            out.update(self.classes[b])
        return tuple(sorted(out))


def class_decomposition(matrix) -> ClassDecomposition:
    """Tarjan SCCs of the directed graph v -> w whenever entry (v, w) is
    positive, plus the transitive reachability order."""
    matrix = tuple(tuple(int(x) for x in row) for row in matrix)
    k = len(matrix)
    if any(len(row) != k for row in matrix):
        raise ArgumentError("class decomposition needs a square matrix")
    if any(x < 0 for row in matrix for x in row):
        raise ArgumentError("matrix must be non-negative")
    if any(all(x == 0 for x in row) for row in matrix) or \
            any(all(row[j] == 0 for row in matrix) for j in range(k)):
        raise ArgumentError("matrix must have no zero row or column")
    succ = [[w for w in range(k) if matrix[v][w] > 0] for v in range(k)]

    index = [None] * k
    low = [0] * k
    on_stack = [False] * k
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(k):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, edge_pos = work[-1]
            if edge_pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for pos in range(edge_pos, len(succ[v])):
                w = succ[v][pos]
                if index[w] is None:
                    work[-1] = (v, pos + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    classes = tuple(sorted(tuple(c) for c in sccs))
    cls_of = {}
    for idx, cls in enumerate(classes):
        for v in cls:
            cls_of[v] = idx
    edges = set()
    for v in range(k):
        for w in succ[v]:
            if cls_of[v] != cls_of[w]:
                edges.add((cls_of[v], cls_of[w]))
    reaches = set(edges)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(reaches):
            for (c, e) in list(reaches):
                if b == c and (a, e) not in reaches:
                    reaches.add((a, e))
                    changed = True
    # sinks first: every edge then points from later blocks to earlier ones
    order = []
    remaining = set(range(len(classes)))
    while remaining:
        for idx in sorted(remaining):
            if all(b not in remaining for b in
                   (b for a, b in reaches if a == idx)):
                order.append(idx)
                remaining.discard(idx)
                break
    permutation = tuple(v for idx in order for v in classes[idx])
    return ClassDecomposition(matrix, classes, tuple(sorted(reaches)),
                              permutation)


@dataclass(frozen=True)
class SpectralInterval:
    class_id: int
    lower: Fraction
    upper: Fraction
    iterations: int
    exact: bool
    converged: bool

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper


def spectral_radius(block, width=Fraction(1, 10 ** 12), class_id: int = 0,
                    max_iterations: int = 4096) -> SpectralInterval:
    """Certified bracket for the spectral radius of an irreducible
    non-negative integer matrix.

    Row quotients of (A + I)^k x bracket rho(A) + 1 from both sides, and
    A + I is primitive, so the bracket contracts.  Whenever the bracket
    pins a single integer that is an exact eigenvalue, the interval
    collapses to a point.
    """
    width = Fraction(width)
    block = tuple(tuple(int(x) for x in row) for row in block)
    k = len(block)
    if any(len(row) != k for row in block):
        raise ArgumentError("spectral radius needs a square matrix")
    if k == 1:
        rho = Fraction(block[0][0])
        return SpectralInterval(class_id, rho, rho, 0, True, True)
    if len(class_decomposition(block).classes) != 1:
        raise ArgumentError("spectral radius needs an irreducible matrix")
    shifted = tuple(tuple(block[i][j] + (1 if i == j else 0)
                          for j in range(k)) for i in range(k))
    x = tuple(Fraction(1) for _ in range(k))
    lo, hi = Fraction(0), None
    for iteration in range(1, max_iterations + 1):
        y = mat_vec(shifted, x)
        quotients = [yi / xi for yi, xi in zip(y, x)]
        lo = max(lo, min(quotients) - 1)
        hi = min(hi, max(quotients) - 1) if hi is not None \
            else max(quotients) - 1
        candidates = [r for r in range(math.ceil(lo), math.floor(hi) + 1)
                      if lo <= r <= hi]
        for r in candidates:
            if det(tuple(tuple(Fraction(block[i][j] - (r if i == j else 0))
                               for j in range(k)) for i in range(k))) == 0:
                return SpectralInterval(class_id, Fraction(r), Fraction(r),
                                        iteration, True, True)
        if hi - lo <= width:
            return SpectralInterval(class_id, lo, hi, iteration, False, True)
        top = max(y)
        x = tuple(v / top for v in y)
    raise ConvergenceError(
        f"spectral bracket did not reach width {width} in "
        f"{max_iterations} iterations",
        partial=SpectralInterval(class_id, lo, hi, max_iterations, False,
                                 False))


@dataclass(frozen=True)
class DistinguishedReport:
    distinguished: tuple       # class ids
    comparisons: dict          # (a, b) -> "greater" | "not_greater"
                               #         | "inconclusive"
    unresolved: tuple          # class ids whose status is open


def distinguished_classes(dec: ClassDecomposition,
                          radii) -> DistinguishedReport:
    """A class is distinguished when its radius strictly dominates every
    class it reaches; overlapping brackets are reported, never guessed."""
    by_id = {interval.class_id: interval for interval in radii}
    comparisons = {}
    distinguished, unresolved = [], []
    for idx in range(len(dec.classes)):
        status = "distinguished"
        for b in dec.below(idx):
            ia, ib = by_id[idx], by_id[b]
            if ia.lower > ib.upper:
                comparisons[(idx, b)] = "greater"
            elif ia.upper <= ib.lower:
                comparisons[(idx, b)] = "not_greater"
                status = "not_distinguished"
            else:
                comparisons[(idx, b)] = "inconclusive"
                if status != "not_distinguished":
                    status = "unresolved"
        if status == "distinguished":
            distinguished.append(idx)
        elif status == "unresolved":
            unresolved.append(idx)
    return DistinguishedReport(tuple(distinguished), comparisons,
                               tuple(unresolved))


@dataclass(frozen=True)
class StationaryMeasure:
    """One measure per class: tower values x_v h_v(n) / rho^(n-1).

    Finite measures (distinguished classes) are normalized to total mass
    one at level 1 and exact when rho is an integer.  Infinite measures
    report finite values on the towers of their own class, the marker
    ``inf`` on towers that feed the class, and 0 elsewhere.
    """

    diagram: BratteliDiagram
    class_id: int
    kind: str                  # "finite" | "infinite"
    rho: SpectralInterval
    vector: tuple              # per-vertex weights (Fraction or float)
    exact: bool
    residual: float
    support: tuple             # vertices with positive finite values
    infinite_on: tuple = ()    # vertices with value inf (infinite kind)

    def values(self, n: int) -> tuple:
        h = self.diagram.heights(n)
        rho = (self.rho.lower if self.exact
               else (float(self.rho.lower) + float(self.rho.upper)) / 2)
        scale = rho ** (n - 1)
        out = []
        for v, weight in enumerate(self.vector):
            if v in self.infinite_on:
                out.append(float("inf"))
            elif self.exact:
                out.append(Fraction(weight) * h[v] / scale)
            else:
                out.append(float(weight) * float(h[v]) / scale)
        return tuple(out)

    def as_tower_measure(self) -> TowerMeasure:
        if self.kind != "finite":
            raise ArgumentError("only finite measures define tower vectors")
        return TowerMeasure.from_evaluator(self.diagram, self.values,
                                           name=f"class{self.class_id}")


def stationary_measures(d: BratteliDiagram, width=Fraction(1, 10 ** 12),
                        require_resolved: bool = True):
    """All per-class measures of a stationary diagram; finite ones are the
    ergodic probability measures, the rest the infinite regular ones."""
    if not d.is_stationary():
        raise ArgumentError("diagram is not stationary")
    matrix = d.incidence(1)
    dec = class_decomposition(matrix)
    radii = [spectral_radius(_submatrix(matrix, cls), width, class_id=idx)
             for idx, cls in enumerate(dec.classes)]
    report = distinguished_classes(dec, radii)
    if require_resolved and report.unresolved:
        raise InconclusiveError(
            f"distinguished status unresolved for classes "
            f"{report.unresolved}; tighten the bracket width")
    measures = []
    for idx in range(len(dec.classes)):
        interval = radii[idx]
        if idx in report.distinguished:
            measures.append(_finite_measure(d, dec, idx, interval))
        else:
            measures.append(_infinite_measure(d, dec, idx, interval))
    return measures, dec, radii, report


def _submatrix(matrix, vertices):
    return tuple(tuple(matrix[v][w] for w in vertices) for v in vertices)


def _finite_measure(d, dec, idx, interval):
    matrix = dec.matrix
    support = dec.reachable_vertices(idx)
    sub = _submatrix(matrix, support)
    if interval.exact:
        rho = interval.lower
        vec = _exact_left_eigenvector(sub, rho)
        residual = 0.0
    else:
        vec, residual = _float_left_eigenvector(sub, interval)
    full = [Fraction(0) if interval.exact else 0.0] * len(matrix)
    for pos, v in enumerate(support):
        full[v] = vec[pos]
    total = sum(full[v] * d.root_edges[v] for v in range(len(matrix)))
    full = [x / total for x in full]
    return StationaryMeasure(d, idx, "finite", interval, tuple(full),
                             interval.exact, residual, support)


def _infinite_measure(d, dec, idx, interval):
    matrix = dec.matrix
    cls = dec.classes[idx]
    sub = _submatrix(matrix, cls)
    if interval.exact:
        vec = _exact_left_eigenvector(sub, interval.lower)
        residual = 0.0
    else:
        vec, residual = _float_left_eigenvector(sub, interval)
    full = [Fraction(0) if interval.exact else 0.0] * len(matrix)
    for pos, v in enumerate(cls):
        full[v] = vec[pos]
    feeders = tuple(v for v in dec.reachable_vertices(idx) if v not in cls)
    return StationaryMeasure(d, idx, "infinite", interval, tuple(full),
                             interval.exact, residual, cls,
                             infinite_on=feeders)


def _exact_left_eigenvector(sub, rho):
    k = len(sub)
    system = tuple(tuple(Fraction(sub[i][j]) - (rho if i == j else 0)
                         for i in range(k)) for j in range(k))
    basis = nullspace(system)
    if len(basis) != 1:
        raise InconclusiveError(
            f"left eigenspace for radius {rho} has dimension {len(basis)}")
    vec = basis[0]
    if all(x <= 0 for x in vec):
        vec = tuple(-x for x in vec)
    if any(x < 0 for x in vec):
        raise InconclusiveError("left eigenvector is not non-negative")
    return vec


def _float_left_eigenvector(sub, interval):
    import numpy as np

    a = np.array([[float(x) for x in row] for row in sub])
    mid = (float(interval.lower) + float(interval.upper)) / 2
    values, vectors = np.linalg.eig(a.T)
    pick = min(range(len(values)), key=lambda i: abs(values[i] - mid))
    vec = np.real(vectors[:, pick])
    if vec.sum() < 0:
        vec = -vec
    vec = np.maximum(vec, 0.0)
    residual = float(np.abs(vec @ a - mid * vec).max())
    return tuple(float(x) for x in vec), residual
