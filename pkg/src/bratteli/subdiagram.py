"""Subdiagrams, thinness, and finite/infinite measure extension.

A vertex subdiagram keeps a subset of vertices per level with all edges
between them; an edge subdiagram keeps all vertices but only some edges
(given by reduced multiplicity matrices).  A probability measure on the
subdiagram spreads over the ambient tail-equivalence classes; whether the
spread mass is finite is decided by one summable series, evaluated in
three algebraically equal forms as a consistency check.  Subdiagrams whose
height fraction vanishes are thin: they are null for every ergodic measure
and their measures only extend to infinite ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .diagram import BratteliDiagram
from .errors import (ArgumentError, DepthError, InfiniteExtensionError,
                     InvarianceError, StructureError)
from .measures import TowerMeasure, check_invariance
from .polyrat import N, Poly, RatFn, ratio_test, series_converges, shift
from .rules import ChainRule, ExpressionRule
from .verdict import Status, Verdict


@dataclass(frozen=True)
class VertexSpec:
    """Retained vertex set per level (ambient indices, level 1 onward)."""

    kind = "vertex"
    levels: tuple | None = None          # explicit per-level tuples
    constant_set: tuple | None = None
    settle_vertex: int | None = None     # W(n) = {min(n, i)}
    fn: Callable | None = None

    @staticmethod
    def explicit(levels):
        return VertexSpec(levels=tuple(tuple(sorted(w)) for w in levels))

    @staticmethod
    def constant(vertices):
        return VertexSpec(constant_set=tuple(sorted(vertices)))

    @staticmethod
    def settle(vertex: int):
        """Climb 0, 1, ..., vertex, then stay at that vertex forever."""
        return VertexSpec(settle_vertex=int(vertex))

    @staticmethod
    def from_function(fn):
        return VertexSpec(fn=fn)

    def retained(self, n: int) -> tuple:
        if self.levels is not None:
            if n > len(self.levels):
                raise DepthError(f"vertex spec defined to level "
                                 f"{len(self.levels)}")
            return self.levels[n - 1]
        if self.constant_set is not None:
            return self.constant_set
        if self.settle_vertex is not None:
            return (min(n, self.settle_vertex),)
        return tuple(sorted(self.fn(n)))


@dataclass(frozen=True)
class EdgeSpec:
    """Retained multiplicity matrices, entrywise at most the ambient
    incidence matrices."""

    matrices: tuple
    kind = "edge"

    def retained_matrix(self, n: int) -> tuple:
        if n > len(self.matrices):
            raise DepthError(f"edge spec defined to level {len(self.matrices)}")
        return self.matrices[n - 1]


def restrict(d: BratteliDiagram, spec, depth: int | None = None,
             validate: bool = True) -> BratteliDiagram:
    """The subdiagram as a standalone diagram (local vertex indices follow
    the sorted retained sets).  A derived generation rule is attached when
    the ambient rule restricts symbolically; otherwise the subdiagram is
    materialized to ``depth``."""
    if spec.kind == "edge":
        prefix = []
        for n, g in enumerate(spec.matrices, start=1):
            f = d.incidence(n)
            if len(g) != len(f) or any(len(gr) != len(fr)
                                       for gr, fr in zip(g, f)):
                raise StructureError(f"edge matrix at level {n} has wrong shape")
            if any(gv > fv for gr, fr in zip(g, f)
                   for gv, fv in zip(gr, fr)):
                raise StructureError(
                    f"edge matrix at level {n} exceeds the ambient "
                    "multiplicities")
            prefix.append(g)
        return BratteliDiagram(d.root_edges, prefix, rule=None,
                               name=f"{d.name}|edge", validate=validate)

    rule, covered = _restricted_rule(d, spec)
    if depth is None:
        depth = covered if rule is None else max(covered, 1)
    root = tuple(d.root_edges[w] for w in spec.retained(1))
    if not root:
        raise StructureError("no retained vertices at level 1")
    prefix = []
    top = covered if rule is not None else depth
    for n in range(1, top):
        f = d.incidence(n)
        lo, hi = spec.retained(n), spec.retained(n + 1)
        prefix.append(tuple(tuple(f[v][w] for w in lo) for v in hi))
    return BratteliDiagram(root, prefix, rule=rule, name=f"{d.name}|sub",
                           validate=validate)


def _restricted_rule(d, spec):
    """(rule, prefix length + 1) for symbolic restrictions; the second
    element is the level the rule starts at."""
    rule = d.rule
    if isinstance(rule, ExpressionRule) and spec.constant_set is not None \
            and rule.from_level == 1:
        w = spec.constant_set
        entries = tuple(tuple(rule.entry_polys()[v][u] for u in w) for v in w)
        return ExpressionRule(entries, 1), 1
    if isinstance(rule, ChainRule) and spec.settle_vertex is not None \
            and rule.from_level == 1:
        start = max(1, spec.settle_vertex)
        sub = ExpressionRule((((rule.diag),),), from_level=start)
        return sub, start
    return None, 1


def sub_heights(d: BratteliDiagram, spec, n: int) -> dict:
    """Heights inside the subdiagram, keyed by ambient vertex index."""
    sub = restrict(d, spec, depth=n, validate=False)
    values = sub.heights(n)
    if spec.kind == "edge":
        return dict(enumerate(values))
    return dict(zip(spec.retained(n), values))


def thinness_test(d: BratteliDiagram, spec, depth: int = 24) -> Verdict:
    """Does the subdiagram carry zero mass for every ergodic measure?

    The decisive quantity is the worst height fraction max h_sub / h over
    retained vertices.  On rule diagrams with a single retained vertex the
    fraction multiplies by a stochastic entry per level and the limit is
    decided by an exact series test.  For non-simple ambient diagrams the
    zero-mass reading is only warranted for edge subdiagrams, so vertex
    cases are reported Inconclusive with the ratio verdict attached.
    """
    trace = _ratio_trace(d, spec, depth)
    inner = _ratio_verdict(d, spec, depth, trace)
    simple = d.is_simple_to_depth(min(depth, 10))
    if simple or spec.kind == "edge":
        return inner
    return Verdict.inconclusive(
        inner.direction, depth, ratio_verdict=inner.to_json(),
        note="ambient diagram shows non-simple structure; the zero-mass "
             "interpretation needs a simple diagram for vertex subdiagrams")


def _ratio_trace(d, spec, depth):
    trace = []
    sub = restrict(d, spec, depth=depth + 1, validate=False)
    for n in range(1, depth + 1):
        h = d.heights(n)
        hs = sub.heights(n)
        keys = spec.retained(n) if spec.kind == "vertex" else range(len(h))
        trace.append(max(Fraction(hv, h[v])
                         for hv, v in zip(hs, keys)))
    return trace


def _ratio_verdict(d, spec, depth, trace):
    direction = "thin subdiagram (vanishing height fraction)"
    quotient = _singleton_quotient(d, spec)
    if quotient is not None:
        defect = RatFn.const(1) - quotient
        conv = series_converges(defect)
        payload = {"ratio_trace": trace, "defect": str(defect)}
        if conv is False:
            return Verdict.proved(direction, depth, **payload)
        if conv is True:
            return Verdict.refuted(direction, depth, **payload,
                                   reason="height fraction tends to a "
                                          "positive limit")
    payload = {"ratio_trace": trace}
    if trace[-1] == trace[0] == 1:
        return Verdict.refuted(direction, depth, **payload,
                               reason="full height fraction")
    last = float(trace[-1])
    if last < 1e-6:
        return Verdict.evidence(direction, depth, **payload)
    mid = float(trace[len(trace) // 2])
    if last < 0.5 * mid:
        return Verdict.evidence(direction, depth, **payload)
    if last > 0 and (mid - last) / last < 5e-2:
        return Verdict.evidence("not " + direction, depth, **payload)
    return Verdict.inconclusive(direction, depth, **payload)


def _singleton_quotient(d, spec):
    """Per-level multiplier of the height fraction, as a rational function:
    the stochastic entry joining the consecutive retained singletons."""
    if spec.kind != "vertex":
        return None
    rule = d.rule
    if isinstance(rule, ExpressionRule) and spec.constant_set is not None \
            and len(spec.constant_set) == 1 and rule.from_level == 1:
        r = rule.ers_row_sum()
        if r is None:
            return None
        w = spec.constant_set[0]
        return RatFn(rule.entry_polys()[w][w], r)
    if isinstance(rule, ChainRule) and spec.settle_vertex is not None:
        return RatFn(rule.diag, rule.ers_row_sum())
    return None


@dataclass(frozen=True)
class ExtensionReport:
    """The three equal partial-sum forms of the spread-mass series, the
    sufficient-condition series, and the combined verdicts."""

    series_entering: tuple      # sum of entering-edge mass per level
    series_tower: tuple         # via extension tower values
    series_increment: tuple     # telescoping retained-mass increments
    sufficient_series: tuple
    verdicts: dict
    depth: int

    @property
    def extension(self) -> Verdict:
        return self.verdicts["extension"]


def extension_test(d: BratteliDiagram, spec, sub_measure: TowerMeasure,
                   depth: int = 24) -> ExtensionReport:
    """Decide (or gather evidence) whether the invariant probability
    measure on the subdiagram extends to a finite ambient measure."""
    report = check_invariance(sub_measure, depth + 1)
    if not report.ok:
        raise InvarianceError(
            f"subdiagram measure is not invariant at level "
            f"{report.first_failure}: {report.reason}")

    s1, s3 = _entering_series(d, spec, sub_measure, depth)
    s2 = _tower_series(d, spec, sub_measure, depth)
    suff = _sufficient_series(d, spec, depth)

    verdicts: dict = {}
    verdicts["equivalent_series"] = _series_verdict(d, spec, sub_measure,
                                                    s1, depth)
    verdicts["sufficient"] = _sufficient_verdict(d, spec, suff, depth)
    verdicts["thinness"] = thinness_test(d, spec, depth)
    verdicts["extension"] = _combine(verdicts, depth)
    return ExtensionReport(tuple(s1), tuple(s2), tuple(s3), tuple(suff),
                           verdicts, depth)


def _retained_incidence(d, spec, n):
    """Sub-multiplicities embedded in ambient indices: {(v, w): count}."""
    f = d.incidence(n)
    if spec.kind == "edge":
        g = spec.retained_matrix(n)
        return {(v, w): g[v][w] for v in range(len(g))
                for w in range(len(g[0])) if g[v][w]}
    lo, hi = spec.retained(n), spec.retained(n + 1)
    return {(v, w): f[v][w] for v in hi for w in lo if f[v][w]}


def _sub_p(d, spec, sub_measure, n):
    """Cylinder values of the subdiagram measure, ambient-indexed."""
    p_local = sub_measure.p(n)
    if spec.kind == "edge":
        return dict(enumerate(p_local))
    return dict(zip(spec.retained(n), p_local))


def _entering_series(d, spec, sub_measure, depth):
    """First and third forms: mass entering through non-retained edges,
    and increments of the retained tower mass.  They are equal term by
    term, which is asserted."""
    s1, s3 = [], []
    acc1 = acc3 = Fraction(0)
    prev_mass = None
    for n in range(1, depth + 1):
        h = d.heights(n)
        h_next = d.heights(n + 1)
        p_next = _sub_p(d, spec, sub_measure, n + 1)
        retained = _retained_incidence(d, spec, n)
        inner = {v: 0 for v in p_next}
        for (v, w), count in retained.items():
            inner[v] += count * h[w]
        term = sum(p * (h_next[v] - inner[v]) for v, p in p_next.items())
        mass_here = sum(_sub_p(d, spec, sub_measure, n)[v] * h[v]
                        for v in _sub_p(d, spec, sub_measure, n))
        mass_next = sum(p * h_next[v] for v, p in p_next.items())
        increment = mass_next - mass_here
        if term != increment:
            raise InvarianceError(
                f"entering-mass and increment forms disagree at level {n}")
        acc1 += term
        acc3 += increment
        s1.append(acc1)
        s3.append(acc3)
        prev_mass = mass_next
    return s1, s3


def _tower_series(d, spec, sub_measure, depth):
    """Second form: extension tower values times the non-retained
    stochastic mass.  Uses the depth-anchored partial extension, so it is
    a finite-depth surrogate of the same series."""
    ext = _partial_extension(d, spec, sub_measure, depth + 1,
                             normalized=False)
    out, acc = [], Fraction(0)
    for n in range(1, depth + 1):
        f = d.stochastic(n)
        q_next = ext[n + 1]
        retained_w = set(spec.retained(n)) if spec.kind == "vertex" else None
        retained = _retained_incidence(d, spec, n)
        p_next = _sub_p(d, spec, sub_measure, n + 1)
        for v in p_next:
            if spec.kind == "vertex":
                outside = sum(f[v][w] for w in range(len(f[v]))
                              if w not in retained_w)
            else:
                h = d.heights(n)
                h_next = d.heights(n + 1)
                inner = sum(count * h[w] for (vv, w), count
                            in retained.items() if vv == v)
                outside = Fraction(h_next[v] - inner, h_next[v])
            acc += q_next[v] * outside
        out.append(acc)
    return out


def _sufficient_series(d, spec, depth):
    """Sufficient condition: summable worst-case non-retained stochastic
    mass over retained destination vertices."""
    out, acc = [], Fraction(0)
    for n in range(1, depth + 1):
        f = d.stochastic(n)
        h = d.heights(n)
        h_next = d.heights(n + 1)
        retained = _retained_incidence(d, spec, n)
        if spec.kind == "vertex":
            lo = set(spec.retained(n))
            worst = max(sum(f[v][w] for w in range(len(f[v]))
                            if w not in lo)
                        for v in spec.retained(n + 1))
        else:
            worst = Fraction(0)
            for v in range(len(f)):
                inner = sum(count * h[w] for (vv, w), count
                            in retained.items() if vv == v)
                worst = max(worst, Fraction(h_next[v] - inner, h_next[v]))
        acc += worst
        out.append(acc)
    return out


def _series_terms(sums):
    prev = Fraction(0)
    for s in sums:
        yield s - prev
        prev = s


def _series_symbolic_ratio(d, spec):
    """Term ratio of the entering-mass series, as a rational function,
    for equal-row-sum rules with an eventually constant single retained
    vertex.  The heights cancel into the row-sum polynomial."""
    rule = d.rule
    if spec.kind != "vertex":
        return None
    if isinstance(rule, ExpressionRule) and spec.constant_set is not None \
            and len(spec.constant_set) == 1 and rule.from_level == 1:
        r = rule.ers_row_sum()
        if r is None:
            return None
        w = spec.constant_set[0]
        polys = rule.entry_polys()
        g = sum((polys[w][u] for u in range(len(polys[w])) if u != w), Poly())
        diag = polys[w][w]
    elif isinstance(rule, ChainRule) and spec.settle_vertex is not None:
        g = N
        diag = rule.diag
        r = rule.ers_row_sum()
    else:
        return None
    if g.is_zero:
        return RatFn(g, r)
    return RatFn(shift(g) * r, g * shift(diag))


def _series_verdict(d, spec, sub_measure, s1, depth):
    direction = "finite measure extension"
    terms = list(_series_terms(s1))
    ratio = _series_symbolic_ratio(d, spec)
    if ratio is not None:
        if ratio.is_zero:
            return Verdict.proved(direction, depth, partial_sums=s1,
                                  note="no entering edges")
        outcome = ratio_test(ratio)
        payload = {"term_ratio": str(ratio), "partial_sums": s1}
        if outcome is True:
            return Verdict.proved(direction, depth, **payload)
        if outcome is False:
            return Verdict.refuted(direction, depth, **payload,
                                   reason="entering-mass series diverges")
    payload = {"partial_sums": s1}
    if not terms or s1[-1] == 0:
        return Verdict.evidence(direction, depth, **payload)
    tail = s1[-1] - s1[len(s1) // 2]
    if float(tail) < 1e-9 * max(float(s1[-1]), 1.0):
        return Verdict.evidence(direction, depth, **payload)
    if float(s1[len(s1) // 2]) > 0 and \
            float(s1[-1]) / float(s1[len(s1) // 2]) > 1.5:
        return Verdict.evidence("not " + direction, depth, **payload)
    return Verdict.inconclusive(direction, depth, **payload)


def _sufficient_verdict(d, spec, suff, depth):
    direction = "sufficient condition for finite extension"
    quotient = None
    if spec.kind == "vertex":
        rule = d.rule
        if isinstance(rule, ExpressionRule) and spec.constant_set is not None \
                and len(spec.constant_set) == 1 and rule.from_level == 1:
            r = rule.ers_row_sum()
            if r is not None:
                w = spec.constant_set[0]
                polys = rule.entry_polys()
                g = sum((polys[w][u] for u in range(len(polys[w]))
                         if u != w), Poly())
                quotient = RatFn(g, r)
        elif isinstance(rule, ChainRule) and spec.settle_vertex is not None:
            quotient = RatFn(N, rule.ers_row_sum())
    if quotient is not None:
        conv = series_converges(quotient)
        payload = {"summand": str(quotient), "partial_sums": suff}
        if conv is True:
            return Verdict.proved(direction, depth, **payload)
        if conv is False:
            return Verdict.refuted(direction, depth, **payload,
                                   reason="worst-case mass series diverges "
                                          "(the condition is only sufficient)")
    payload = {"partial_sums": suff}
    tail = suff[-1] - suff[len(suff) // 2]
    if float(tail) < 1e-9 * max(float(suff[-1]), 1.0):
        return Verdict.evidence(direction, depth, **payload)
    return Verdict.inconclusive(direction, depth, **payload)


def _combine(verdicts, depth):
    direction = "finite measure extension"
    thin = verdicts["thinness"]
    series = verdicts["equivalent_series"]
    suff = verdicts["sufficient"]
    if thin.status == Status.PROVED:
        return Verdict.refuted(direction, depth,
                               reason="thin subdiagrams only extend to "
                                      "infinite measures",
                               forced_by="thinness")
    if series.status == Status.PROVED:
        return Verdict.proved(direction, depth, via="equivalent series")
    if suff.status == Status.PROVED:
        return Verdict.proved(direction, depth, via="sufficient condition")
    if series.status == Status.REFUTED:
        return Verdict.refuted(direction, depth, via="equivalent series")
    if thin.direction.startswith("thin") and thin.status == Status.EVIDENCE:
        return Verdict.evidence("infinite measure extension", depth,
                                via="thinness evidence")
    if series.status == Status.EVIDENCE:
        return Verdict(series.status, series.direction, depth, series.payload)
    return Verdict.inconclusive(direction, depth)


def _partial_extension(d, spec, sub_measure, anchor, normalized=True):
    """Tower vectors of the extension, anchored at ``anchor``: mass sits on
    the retained vertices there and spreads by exact back-propagation."""
    p_anchor = _sub_p(d, spec, sub_measure, anchor)
    h = d.heights(anchor)
    k = d.num_vertices(anchor)
    q = [Fraction(0)] * k
    for v, p in p_anchor.items():
        q[v] = p * h[v]
    total = sum(q)
    vectors = {anchor: tuple(q)}
    p_vec = [Fraction(0)] * k
    for v, p in p_anchor.items():
        p_vec[v] = p
    for n in range(anchor - 1, 0, -1):
        f = d.incidence(n)
        h = d.heights(n)
        nxt = p_vec
        p_vec = [sum(f[v][w] * nxt[v] for v in range(len(f)))
                 for w in range(len(f[0]))]
        vectors[n] = tuple(p_vec[w] * h[w] for w in range(len(h)))
    if normalized:
        vectors = {n: tuple(x / total for x in vec)
                   for n, vec in vectors.items()}
    return vectors


def extend_measure(d: BratteliDiagram, spec, sub_measure: TowerMeasure,
                   depth: int = 16, require_proof: bool = True) -> TowerMeasure:
    """Extend the subdiagram measure to an exact ambient tower measure.

    The finite-depth construction anchors all mass at the deepest level
    and back-propagates, then normalizes; the result is exactly invariant
    on levels 1..depth.  Extension is refused when the finiteness verdict
    is Proved-infinite, and (unless ``require_proof`` is off) when it is
    not proved finite.
    """
    report = extension_test(d, spec, sub_measure, depth)
    verdict = report.extension
    if verdict.status == Status.REFUTED or \
            verdict.direction.startswith("infinite"):
        raise InfiniteExtensionError(
            "the extension is infinite; no probability tower measure exists")
    if require_proof and verdict.status != Status.PROVED:
        raise InfiniteExtensionError(
            f"extension finiteness is {verdict.status.value}; pass "
            "require_proof=False to extend anyway")
    vectors = _partial_extension(d, spec, sub_measure, depth + 1)
    data = [vectors[n] for n in range(1, depth + 2)]
    return TowerMeasure.from_vectors(d, data,
                                     name=f"{sub_measure.name}^ext")
