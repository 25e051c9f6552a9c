"""Vertex-block partitions: vanishing blocks, per-block criteria, chains.

Two related analyses live here.  For constant-rank diagrams, a partition
{V(n,1) ... V(n,l), V(n,0)} is tested against the per-block conditions
(non-empty blocks, constant sizes, summable off-block mass, vanishing
in-block row differences, degenerating leftover simplex volume, leftover
rows bounded away from full block mass).  For growing diagrams the block
structure refines level by level; maximal chains of blocks linked by
majority mass transport name candidate ergodic measures, and the same
conditions are evaluated along the links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable

from .diagram import BratteliDiagram
from .errors import ArgumentError, PartitionError
from .linalg import l1_dist, mat_mul
from .polyrat import N, Poly, RatFn, eventual_max, eventual_min, series_converges
from .rules import ChainRule, ExpressionRule
from .verdict import Verdict


@dataclass(frozen=True)
class BlockPartition:
    """Per-level partition of the vertex set into numbered blocks plus an
    optional leftover block 0.  Blocks are given once (constant), per
    level, or through a function (level, size) -> (blocks, leftover)."""

    constant_blocks: tuple | None = None
    constant_zero: tuple = ()
    per_level_map: tuple | None = None
    fn: Callable | None = None

    @staticmethod
    def constant(blocks, zero=()):
        return BlockPartition(tuple(tuple(b) for b in blocks), tuple(zero))

    @staticmethod
    def per_level(mapping: dict):
        items = tuple(sorted((lvl, tuple(tuple(b) for b in bz[0]),
                              tuple(bz[1])) for lvl, bz in mapping.items()))
        return BlockPartition(per_level_map=items)

    @staticmethod
    def from_function(fn):
        return BlockPartition(fn=fn)

    @staticmethod
    def singletons():
        """One block per vertex at every level, empty leftover block."""
        return BlockPartition(
            fn=lambda level, size: ([(v,) for v in range(size)], ()))

    @property
    def is_constant(self) -> bool:
        return self.constant_blocks is not None

    @property
    def is_singleton(self) -> bool:
        if self.fn is None:
            return False
        blocks, zero = self.fn(3, 4)
        return not zero and [tuple(b) for b in blocks] == \
            [(v,) for v in range(4)]

    def at(self, level: int, size: int):
        """Blocks and leftover set at one level, validated against the
        level size."""
        if self.constant_blocks is not None:
            blocks, zero = self.constant_blocks, self.constant_zero
        elif self.per_level_map is not None:
            row = next((item for item in self.per_level_map
                        if item[0] == level), None)
            if row is None:
                raise PartitionError(f"partition gives no blocks for level "
                                     f"{level}")
            blocks, zero = row[1], row[2]
        else:
            raw_blocks, zero = self.fn(level, size)
            blocks, zero = [tuple(b) for b in raw_blocks], tuple(zero)
        if any(not b for b in blocks):
            raise PartitionError(f"empty block at level {level}")
        flat = [v for b in blocks for v in b] + list(zero)
        if sorted(flat) != list(range(size)):
            raise PartitionError(
                f"blocks at level {level} do not partition the "
                f"{size} vertices")
        return [tuple(b) for b in blocks], tuple(zero)


@dataclass(frozen=True)
class BlocksReport:
    conditions: dict
    vanishing_blocks: tuple
    regularity: dict
    depth: int


def blocks_analysis(d: BratteliDiagram, partition: BlockPartition,
                    depth: int = 24, auto_block_bound: int = 3) -> BlocksReport:
    """Evaluate the constant-rank block conditions and auto-detect
    vanishing blocks among small constant vertex subsets."""
    if depth < 3:
        raise ArgumentError("depth must be at least 3")
    layout = [partition.at(n, d.num_vertices(n)) for n in range(1, depth + 2)]
    if len({len(blocks) for blocks, _ in layout}) != 1:
        raise PartitionError("number of blocks changes with the level; use "
                             "chain_analysis for growing partitions")
    nblocks = len(layout[0][0])
    size_profiles = {tuple(len(b) for b in blocks) for blocks, _ in layout}
    conditions: dict = {}

    conditions["a"] = Verdict.proved("all blocks non-empty", depth)
    if len(size_profiles) == 1:
        make = Verdict.proved if partition.is_constant else Verdict.evidence
        conditions["b"] = make("block sizes constant", depth,
                               sizes=sorted(size_profiles)[0])
    else:
        conditions["b"] = Verdict.refuted("block sizes constant", depth,
                                          sizes=sorted(size_profiles))

    sym = _sym_entries(d)
    conditions["c"] = [
        _offblock_series(d, sym, layout, j, depth) for j in range(nblocks)]
    conditions["d"] = _inblock_rowdiff(d, layout, depth)
    conditions["e1"] = _volume_condition(d, layout, nblocks, depth)
    conditions["e2"] = _leftover_mass_condition(d, layout, depth)

    vanishing, regularity = _detect_vanishing_blocks(d, depth, auto_block_bound)
    return BlocksReport(conditions, vanishing, regularity, depth)


def _sym_entries(d):
    rule = d.rule
    if not isinstance(rule, ExpressionRule):
        return None
    r = rule.ers_row_sum()
    if r is None or r.is_zero:
        return None
    return rule.entry_polys(), r


def _offblock_series(d, sym, layout, j, depth):
    """Condition: 1 - min over block-j rows of the in-block mass is
    summable."""
    direction = f"off-block mass of block {j + 1} is summable"
    trace, sums, acc = [], [], Fraction(0)
    for n in range(1, depth + 1):
        f = d.stochastic(n)
        lo = layout[n - 1][0][j]
        hi = layout[n][0][j]
        term = 1 - min(sum(f[v][w] for w in lo) for v in hi)
        trace.append(term)
        acc += term
        sums.append(acc)
    if sym is not None and all(item == layout[0] for item in layout):
        polys, r = sym
        block = layout[0][0][j]
        in_mass = eventual_min([
            RatFn(sum((polys[v][w] for w in block), Poly()), r)
            for v in block])
        term_fn = RatFn.const(1) - in_mass
        conv = series_converges(term_fn)
        payload = {"summand": str(term_fn), "partial_sums": sums,
                   "trace": trace}
        if conv is True:
            return Verdict.proved(direction, depth, **payload)
        if conv is False:
            return Verdict.refuted(direction, depth, **payload)
    payload = {"partial_sums": sums, "trace": trace}
    if all(t == 0 for t in trace):
        return Verdict.proved(direction, depth, **payload)
    tail = sums[-1] - sums[len(sums) // 2]
    if float(tail) < 1e-6:
        return Verdict.evidence(direction, depth, **payload)
    if float(sums[len(sums) // 2]) > 0 and \
            float(sums[-1]) / float(sums[len(sums) // 2]) > 1.5:
        return Verdict.evidence("not " + direction, depth, **payload)
    return Verdict.inconclusive(direction, depth, **payload)


def _inblock_rowdiff(d, layout, depth):
    direction = "in-block row differences vanish"
    trace = []
    for n in range(1, depth + 1):
        f = d.stochastic(n)
        worst = Fraction(0)
        for block in layout[n][0]:
            for a in range(len(block)):
                for b in range(a + 1, len(block)):
                    worst = max(worst, l1_dist(f[block[a]], f[block[b]]))
        trace.append(worst)
    if all(t == 0 for t in trace):
        return Verdict.proved(direction, depth, trace=trace)
    if float(trace[-1]) < 1e-3 and trace[-1] <= trace[len(trace) // 2]:
        return Verdict.evidence(direction, depth, trace=trace)
    return Verdict.inconclusive(direction, depth, trace=trace)


def _volume_condition(d, layout, nblocks, depth):
    """Each leftover vertex vector must collapse the simplex it spans with
    the block barycenters of the base-level slice."""
    import numpy as np

    direction = "leftover simplex volumes vanish"
    if all(not zero for _, zero in layout):
        return Verdict.proved(direction, depth, note="no leftover block")
    trace = []
    product = d.stochastic(1)
    for n in range(2, depth + 1):
        product = mat_mul(d.stochastic(n), product)
        blocks, zero = layout[n]
        if not zero:
            continue
        vecs = [np.array([float(x) for x in row]) for row in product]
        worst = 0.0
        for w in zero:
            points = [sum(vecs[v] for v in block) / len(block)
                      for block in blocks]
            points.append(vecs[w])
            m = np.array([p - points[0] for p in points[1:]])
            gram = m @ m.T
            vol = math.sqrt(max(float(np.linalg.det(gram)), 0.0))
            trace_val = vol / math.factorial(nblocks)
            worst = max(worst, trace_val)
        trace.append(worst)
    if not trace:
        return Verdict.inconclusive(direction, depth,
                                    note="no deep leftover data")
    if trace[-1] < 1e-6 or trace[-1] <= trace[0] * 1e-3:
        return Verdict.evidence(direction, depth, trace=trace)
    if trace[-1] < trace[0]:
        return Verdict.inconclusive(direction, depth, trace=trace)
    return Verdict.evidence("not " + direction, depth, trace=trace)


def _leftover_mass_condition(d, layout, depth):
    direction = "leftover rows stay bounded away from full block mass"
    if all(not zero for _, zero in layout):
        return Verdict.proved(direction, depth, note="no leftover block")
    trace = []
    for n in range(1, depth + 1):
        f = d.stochastic(n)
        blocks_lo = layout[n - 1][0]
        zero_hi = layout[n][1]
        level_worst = Fraction(0)
        for v in zero_hi:
            for block in blocks_lo:
                level_worst = max(level_worst, sum(f[v][w] for w in block))
        trace.append(level_worst)
    tail = trace[len(trace) // 2:]
    margin = 1 - max(tail) if tail else Fraction(0)
    if margin > 0:
        return Verdict.evidence(direction, depth, margin=margin, trace=trace)
    return Verdict.evidence("not " + direction, depth, trace=trace)


def _detect_vanishing_blocks(d, depth, bound):
    """Scan constant vertex subsets of size <= bound for vanishing inflow
    from the complement, and estimate the regularity constant.  On rule
    diagrams the inflow is a rational function and its zero limit is
    exact; otherwise a shrinking numeric trace is accepted."""
    k = d.num_vertices(1)
    if any(d.num_vertices(n) != k for n in range(1, depth + 2)):
        return (), {}
    sym = _sym_entries(d)
    found, regularity = [], {}
    for size in range(1, min(bound, k - 1) + 1):
        for subset in combinations(range(k), size):
            trace, ratios = [], []
            for n in range(1, depth + 1):
                f = d.stochastic(n)
                inflow = sum(f[v][w] for v in subset
                             for w in range(k) if w not in subset)
                trace.append(inflow)
                outside = [sum(f[v][w] for w in range(k) if w not in subset)
                           for v in subset]
                hi = max(outside)
                if hi > 0:
                    ratios.append(min(outside) / hi)
            if sym is not None:
                polys, r = sym
                inflow_fn = RatFn(
                    sum((polys[v][w] for v in subset
                         for w in range(k) if w not in subset), Poly()), r)
                vanishing = inflow_fn.limit() == 0
            else:
                mid = trace[len(trace) // 2]
                vanishing = trace[-1] == 0 or \
                    (float(trace[-1]) < 0.02 and trace[-1] <= mid * Fraction(1, 2))
            if vanishing:
                found.append(subset)
                tail = ratios[len(ratios) // 2:]
                regularity[subset] = min(tail) if tail else Fraction(1)
    return tuple(found), regularity


# -- growing partitions and chains --------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    start_level: int
    depth: int
    prefixes: tuple            # surviving chains, as 1-based block-id tuples
    degenerate: tuple          # pruned single-path chains
    orphaned_levels: tuple     # levels where some block had no majority parent
    conditions: dict
    count_claim: int
    growing_family: bool


def chain_analysis(d: BratteliDiagram, partition: BlockPartition,
                   depth: int = 16,
                   start_level: int | None = None) -> ChainReport:
    """Enumerate block chains linked by strict majority mass transport.

    A block at level n+1 extends a chain through the unique parent block
    that supplies more than half of the stochastic mass of each of its
    vertices.  Chains whose linked sub-blocks carry a single path cannot
    support a non-atomic measure and are pruned as degenerate.  The
    surviving prefixes are the candidate ergodic measures; the off-parent
    mass series is evaluated along the links.
    """
    if depth < 2:
        raise ArgumentError("depth must be at least 2")
    state = _ChainState(d, partition)
    if start_level is None:
        start_level = 1
        while start_level < depth and not state.links(start_level):
            start_level += 1
    top = start_level + depth
    prefixes, degenerate = _enumerate_prefixes(state, start_level, top)
    half_top = start_level + max(2, depth // 2)
    shallow, _ = _enumerate_prefixes(state, start_level, half_top)
    orphaned = tuple(n for n in range(start_level, top)
                     if len(state.links(n)) < len(state.layout(n + 1)[0]))

    conditions = {
        "c1": _chain_series(state, start_level, top),
        "d1": _chain_rowdiff(state, start_level, top),
    }
    conditions.update(_chain_leftover(state, start_level, top))

    growing = len(prefixes) > len(shallow) > 0
    return ChainReport(start_level, depth, prefixes, degenerate, orphaned,
                       conditions, len(prefixes), growing)


class _ChainState:
    """Memoized layouts and majority links for one chain analysis."""

    def __init__(self, d, partition):
        self.d = d
        self.partition = partition
        self._layouts = {}
        self._links = {}

    def layout(self, n):
        if n not in self._layouts:
            self._layouts[n] = self.partition.at(n, self.d.num_vertices(n))
        return self._layouts[n]

    def links(self, n):
        """Child block id -> parent block id at level n, strict majority."""
        if n not in self._links:
            f = self.d.stochastic(n)
            blocks_lo, _ = self.layout(n)
            blocks_hi, _ = self.layout(n + 1)
            half = Fraction(1, 2)
            links = {}
            for j, child in enumerate(blocks_hi):
                for i, parent in enumerate(blocks_lo):
                    if all(sum(f[v][w] for w in parent) > half
                           for v in child):
                        links[j] = i
                        break
            self._links[n] = links
        return self._links[n]


def _enumerate_prefixes(state, start_level, top):
    """Chains are walked upward from the final level; parents are unique,
    so each surviving final block yields exactly one prefix."""
    prefixes, degenerate = [], []
    final_blocks, _ = state.layout(top)
    for j_final in range(len(final_blocks)):
        chain = [j_final]
        for n in range(top - 1, start_level - 1, -1):
            parent = state.links(n).get(chain[-1])
            if parent is None:
                chain = None
                break
            chain.append(parent)
        if chain is None:
            continue
        chain.reverse()
        counts = {v: 1 for v in state.layout(start_level)[0][chain[0]]}
        for offset, n in enumerate(range(start_level, top)):
            child = state.layout(n + 1)[0][chain[offset + 1]]
            fmat = state.d.incidence(n)
            counts = {v: sum(fmat[v][w] * c for w, c in counts.items())
                      for v in child}
        prefix = tuple(b + 1 for b in chain)
        if sum(counts.values()) <= 1:
            degenerate.append(prefix)
        else:
            prefixes.append(prefix)
    return tuple(sorted(prefixes)), tuple(sorted(degenerate))


def _chain_series(state, start_level, top):
    direction = "off-parent mass along chains is summable"
    d = state.d
    trace, sums, acc = [], [], Fraction(0)
    for n in range(start_level, top):
        f = d.stochastic(n)
        blocks_lo, _ = state.layout(n)
        blocks_hi, _ = state.layout(n + 1)
        worst = Fraction(0)
        for j, i in state.links(n).items():
            parent = set(blocks_lo[i])
            for v in blocks_hi[j]:
                worst = max(worst, sum(f[v][w] for w in range(len(f[v]))
                                       if w not in parent))
        trace.append(worst)
        acc += worst
        sums.append(acc)
    term_fn = _chain_series_symbolic(state)
    if term_fn is not None:
        conv = series_converges(term_fn)
        payload = {"summand": str(term_fn), "partial_sums": sums,
                   "trace": trace}
        if conv is True:
            return Verdict.proved(direction, top, **payload)
        if conv is False:
            return Verdict.refuted(direction, top, **payload)
    payload = {"partial_sums": sums, "trace": trace}
    if not trace:
        return Verdict.inconclusive(direction, top, note="no links found")
    tail = sums[-1] - sums[len(sums) // 2]
    if float(tail) < 1e-6:
        return Verdict.evidence(direction, top, **payload)
    return Verdict.inconclusive(direction, top, **payload)


def _chain_series_symbolic(state):
    """Rational off-parent mass: growing band rules with singleton blocks
    lose mass n / (a(n) + n); constant equal-row-sum rules with a constant
    partition lose the stable off-parent entry sums."""
    d, partition = state.d, state.partition
    if isinstance(d.rule, ChainRule) and partition.is_singleton:
        return RatFn(N, d.rule.diag + N)
    if isinstance(d.rule, ExpressionRule) and \
            (partition.is_constant or partition.is_singleton):
        sym = _sym_entries(d)
        if sym is None:
            return None
        polys, r = sym
        probe = d.rule.from_level + 1
        links = state.links(probe)
        if not links:
            return None
        blocks_lo, _ = state.layout(probe)
        blocks_hi, _ = state.layout(probe + 1)
        fns = []
        for j, i in links.items():
            parent = set(blocks_lo[i])
            for v in blocks_hi[j]:
                outside = sum((polys[v][w] for w in range(len(polys[v]))
                               if w not in parent), Poly())
                fns.append(RatFn(outside, r))
        return eventual_max(fns) if fns else None
    return None


def _chain_rowdiff(state, start_level, top):
    direction = "in-block row differences vanish along chains"
    trace = []
    for n in range(start_level, top):
        f = state.d.stochastic(n)
        blocks_hi, _ = state.layout(n + 1)
        worst = Fraction(0)
        for block in blocks_hi:
            for a in range(len(block)):
                for b in range(a + 1, len(block)):
                    worst = max(worst, l1_dist(f[block[a]], f[block[b]]))
        trace.append(worst)
    if all(t == 0 for t in trace):
        return Verdict.proved(direction, top, trace=trace)
    if float(trace[-1]) < 1e-3:
        return Verdict.evidence(direction, top, trace=trace)
    return Verdict.inconclusive(direction, top, trace=trace)


def _chain_leftover(state, start_level, top):
    out = {}
    t11, t12 = [], []
    for n in range(start_level, top):
        f = state.d.stochastic(n)
        blocks_lo, zero_lo = state.layout(n)
        _, zero_hi = state.layout(n + 1)
        if not zero_hi:
            continue
        for v in zero_hi:
            t11.append(sum(f[v][w] for w in range(len(f[v]))
                           if w not in zero_lo))
            for block in blocks_lo:
                t12.append(sum(f[v][w] for w in block))
    if not t11:
        out["e1.1"] = Verdict.proved("leftover inflow tends to full mass",
                                     top, note="no leftover block")
        out["e1.2"] = Verdict.proved("leftover block mass bounded below one",
                                     top, note="no leftover block")
        return out
    if float(t11[-1]) > 1 - 1e-3:
        out["e1.1"] = Verdict.evidence("leftover inflow tends to full mass",
                                       top, trace=t11)
    else:
        out["e1.1"] = Verdict.inconclusive(
            "leftover inflow tends to full mass", top, trace=t11)
    margin = 1 - max(t12[len(t12) // 2:])
    if margin > 0:
        out["e1.2"] = Verdict.evidence("leftover block mass bounded below one",
                                       top, margin=margin, trace=t12)
    else:
        out["e1.2"] = Verdict.evidence(
            "not leftover block mass bounded below one", top, trace=t12)
    return out
