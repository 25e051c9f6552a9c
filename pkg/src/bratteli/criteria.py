"""Unique-ergodicity and exact-measure-count criteria.

Each criterion follows the same pattern: on rule diagrams the decisive
quantity is a rational function of the level, so convergence or divergence
of its series is decided exactly and the verdict is Proved or Refuted; on
explicit prefixes only a finite trace is available and the verdict is
Evidence or Inconclusive, with the trace attached.

Naming of the criteria (all take the per-level stochastic or incidence
matrices as input):

* ``min_sum``     divergent sum of minimal stochastic entries,
* ``row_diff``    greedy telescoping until the max L1 row difference of
                  stochastic products drops below 2^-k,
* ``tau_product`` Birkhoff contraction of incidence-transpose products,
* ``phi_sum``     divergent sum of sqrt(phi) of the incidence transposes,
* ``ratio_sum``   divergent sum of (min entry / max entry),
* ``norm_growth`` linearly bounded L1 norm of the incidence matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .diagram import BratteliDiagram
from .errors import (ArgumentError, PartitionError, PrimitivityError,
                     RankError, SingularError)
from .linalg import l1_dist, mat_mul, transpose
from .polyrat import (N, Poly, RatFn, eventual_max, eventual_min, ratio_test,
                      series_converges)
from .rules import ChainRule, ExpressionRule
from .verdict import Verdict

UE = "uniquely ergodic"


def projective_metric(x, y) -> float:
    """Hilbert projective distance ln max (x_i y_j) / (x_j y_i) between
    strictly positive vectors; zero exactly on proportional pairs."""
    if len(x) != len(y) or not x:
        raise ArgumentError("vectors must be non-empty and equally long")
    if any(v <= 0 for v in x) or any(v <= 0 for v in y):
        raise ArgumentError("projective metric needs strictly positive entries")
    ratios = [Fraction(a) / Fraction(b) for a, b in zip(x, y)]
    return math.log(float(max(ratios) / min(ratios)))


@dataclass(frozen=True)
class ContractionStats:
    """phi is the minimal cross-ratio of the matrix (0 with a zero entry);
    tau the Birkhoff contraction coefficient (1-sqrt(phi))/(1+sqrt(phi)),
    exact whenever phi is a perfect rational square."""

    phi: Fraction
    tau: Fraction | float


def contraction_stats(a) -> ContractionStats:
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if any(all(x == 0 for x in row) for row in a):
        raise ArgumentError("contraction stats need a matrix with no zero row")
    if any(x < 0 for row in a for x in row):
        raise ArgumentError("matrix must be non-negative")
    if any(x == 0 for row in a for x in row):
        return ContractionStats(Fraction(0), _tau_from_phi(Fraction(0)))
    best = None
    for i in range(rows):
        for r in range(rows):
            if i == r:
                continue
            # min_{j,s} (a_ij a_rs)/(a_rj a_is) factorizes over columns
            m1 = min(Fraction(a[i][j], a[r][j]) for j in range(cols))
            m2 = min(Fraction(a[r][s], a[i][s]) for s in range(cols))
            cand = m1 * m2
            if best is None or cand < best:
                best = cand
    phi = Fraction(1) if best is None else min(best, Fraction(1))
    return ContractionStats(phi, _tau_from_phi(phi))


def brute_force_phi(a) -> Fraction:
    """Oracle: the same minimum by exhaustive index quadruples."""
    if any(x == 0 for row in a for x in row):
        return Fraction(0)
    rows, cols = len(a), len(a[0])
    best = None
    for i in range(rows):
        for j in range(cols):
            for r in range(rows):
                for s in range(cols):
                    q = Fraction(a[i][j] * a[r][s], a[r][j] * a[i][s])
                    if best is None or q < best:
                        best = q
    return best


def _tau_from_phi(phi: Fraction):
    if phi == 0:
        return Fraction(1)
    num, den = phi.numerator, phi.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        root = Fraction(rn, rd)
        return (1 - root) / (1 + root)
    root = math.sqrt(float(phi))
    return (1 - root) / (1 + root)


def is_primitive(a) -> bool:
    """Boolean-power primitivity test (Wielandt bound on the exponent)."""
    k = len(a)
    if k != len(a[0]):
        return False
    limit = (k - 1) * (k - 1) + 1
    reach = tuple(tuple(bool(x) for x in row) for row in a)
    step = 0
    while step < limit and not all(all(row) for row in reach):
        reach = tuple(
            tuple(any(reach[i][m] and a[m][j] for m in range(k))
                  for j in range(k))
            for i in range(k))
        step += 1
    return all(all(row) for row in reach)


# -- symbolic helpers ---------------------------------------------------------


def _symbolic_stochastic(d: BratteliDiagram):
    """Stochastic entries as rational functions of the level, available
    exactly for constant-shape equal-row-sum rules."""
    rule = d.rule
    if not isinstance(rule, ExpressionRule):
        return None
    r = rule.ers_row_sum()
    if r is None or r.is_zero:
        return None
    return [[RatFn(p, r) for p in row] for row in rule.entry_polys()], r


def _growth_evidence(partial_sums):
    """Crude direction read on a partial-sum trace: keeps growing vs
    flattens out."""
    if len(partial_sums) < 8:
        return None
    half = partial_sums[len(partial_sums) // 2]
    full = partial_sums[-1]
    if half == 0:
        return False if full == 0 else True
    return float(full) / float(half) > 1.2


def _plateaued(trace, rel=1e-2, window=5) -> bool:
    if len(trace) <= window:
        return False
    last, prev = float(trace[-1]), float(trace[-1 - window])
    if last == 0:
        return False
    return (prev - last) / last < rel


# -- unique ergodicity --------------------------------------------------------

CRITERIA = ("min_sum", "row_diff", "tau_product", "phi_sum", "ratio_sum",
            "norm_growth")


def unique_ergodicity(d: BratteliDiagram, criterion: str, depth: int = 32,
                      stages: int = 8) -> Verdict:
    """Run one UE criterion to the given level depth; see module docstring
    for the catalog of criteria."""
    if criterion not in CRITERIA:
        raise ArgumentError(f"unknown criterion {criterion!r}; have {CRITERIA}")
    if depth < 2:
        raise ArgumentError("depth must be at least 2")
    if criterion == "min_sum":
        return _min_sum(d, depth)
    if criterion == "row_diff":
        return _row_diff(d, depth, stages)
    if criterion == "tau_product":
        return _tau_product(d, depth)
    if criterion == "phi_sum":
        return _phi_sum(d, depth)
    if criterion == "ratio_sum":
        return _ratio_sum(d, depth)
    return _norm_growth(d, depth)


def _min_sum(d, depth):
    trace, sums, acc = [], [], Fraction(0)
    for n in range(1, depth + 1):
        m = min(x for row in d.stochastic(n) for x in row)
        trace.append(m)
        acc += m
        sums.append(acc)
    sym = _symbolic_stochastic(d)
    if sym is not None:
        entries, _ = sym
        term = eventual_min([f for row in entries for f in row])
        conv = series_converges(term)
        payload = {"summand": str(term), "partial_sums": sums, "trace": trace}
        if conv is False:
            return Verdict.proved(UE, depth, **payload,
                                  rule="divergent minimal-entry sum")
        if conv is True:
            return Verdict.inconclusive(
                UE, depth, **payload,
                note="minimal-entry sum converges; the sufficient "
                     "condition does not apply")
    growing = _growth_evidence(sums)
    payload = {"partial_sums": sums, "trace": trace}
    if growing:
        return Verdict.evidence(UE, depth, **payload,
                                note="minimal-entry sum keeps growing")
    return Verdict.inconclusive(UE, depth, **payload)


def _row_diff(d, depth, stages):
    """Greedy telescoping: from the current base, extend until the product
    diameter drops below 2^-k, then restart at the next level.

    On symmetric two-vertex equal-row-sum rules the product diameter is
    2 |prod (a(i)-b(i))/(a(i)+b(i))|, which telescopes in closed form, so
    the search reaches targets far beyond any level budget.
    """
    delta = _symmetric_two_vertex_delta(d)
    if delta is not None:
        return _row_diff_closed_form(d, delta, stages, depth)
    base = 1
    witness, diam_trace = [], []
    for k in range(1, stages + 1):
        target = Fraction(1, 2 ** k)
        product = d.stochastic(base)
        stage_trace = []
        m = 0
        achieved = None
        while True:
            diam = _product_diameter(product)
            stage_trace.append(diam)
            if diam < target:
                achieved = (base, m, diam)
                break
            if base + m + 1 >= depth:
                break
            m += 1
            product = mat_mul(d.stochastic(base + m), product)
        if achieved is None:
            payload = {"witness": witness, "stage": k,
                       "stage_trace": stage_trace, "targets_met": k - 1}
            if _plateaued(stage_trace):
                return Verdict.evidence(
                    "not " + UE, depth,
                    **payload, note="product diameter plateaus above target")
            return Verdict.inconclusive(UE, depth, **payload,
                                        note="level budget exhausted")
        witness.append({"base": achieved[0], "depth": achieved[1],
                        "diameter": achieved[2]})
        diam_trace.append(achieved[2])
        base = base + achieved[1] + 1
    return Verdict.evidence(UE, depth, witness=witness, trace=diam_trace,
                            note=f"telescoping reached 2^-{stages}")


def _symmetric_two_vertex_delta(d):
    """(a - b) / (a + b) for rule diagrams [[a, b], [b, a]] with equal root
    edges; the stochastic matrices are then symmetric at every level."""
    rule = d.rule
    if not isinstance(rule, ExpressionRule):
        return None
    polys = rule.entry_polys()
    if len(polys) != 2 or len(polys[0]) != 2:
        return None
    if len(set(d.root_edges)) != 1:
        return None
    a, b = polys[0][0], polys[0][1]
    if not ((polys[1][1] - a).is_zero and (polys[1][0] - b).is_zero):
        return None
    return RatFn(a - b, a + b)


def _row_diff_closed_form(d, delta, stages, depth):
    from .polyrat import product_value

    def diameter(base, m):
        value = product_value(delta, base, base + m)
        if value is None:
            return None
        return 2 * abs(value)

    shrinks = series_converges(RatFn.const(1) - _abs_eventually(delta))
    base = 1
    witness, diam_trace = [], []
    for k in range(1, stages + 1):
        target = Fraction(1, 2 ** k)
        if shrinks is True:
            # positive limit: estimate the tail product with floats
            plateau, value = _tail_product_estimate(delta, base)
            if plateau and 2 * value > float(target):
                return Verdict.evidence(
                    "not " + UE, depth, witness=witness,
                    plateau=2 * value, stage=k,
                    note="product diameter is bounded below a positive limit")
        achieved = _stage_search(diameter, delta, base, target)
        if achieved is None:
            return Verdict.inconclusive(
                UE, depth, witness=witness, stage=k, targets_met=k - 1,
                note="stage search budget exhausted")
        m, diam = achieved
        witness.append({"base": base, "depth": m, "diameter": diam})
        diam_trace.append(diam)
        base = base + m + 1
    return Verdict.evidence(UE, depth, witness=witness, trace=diam_trace,
                            note=f"telescoping reached 2^-{stages}")


def _abs_eventually(f):
    """f or -f, whichever is eventually non-negative."""
    return f if f.eventual_sign() >= 0 else RatFn(Poly()) - f


def _stage_search(diameter, delta, base, target, scan_budget=4096):
    """Smallest m with diameter(base, m) < target: bisection on the closed
    form when available, bounded incremental scan otherwise."""
    if diameter(base, 0) is not None:
        hi = 1
        while diameter(base, hi) >= target:
            hi *= 2
            if hi > 2 ** 40:
                return None
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if diameter(base, mid) < target:
                hi = mid
            else:
                lo = mid + 1
        return lo, diameter(base, lo)
    running = Fraction(1)
    for m in range(scan_budget):
        running *= delta(base + m)
        if 2 * abs(running) < target:
            return m, 2 * abs(running)
    return None


def _tail_product_estimate(delta, base, horizon=5000):
    """Float estimate of prod_{i >= base} |delta(i)|; returns (plateaued,
    value)."""
    value = 1.0
    checkpoint = 1.0
    for i in range(base, base + horizon):
        value *= abs(float(delta(i)))
        if i == base + horizon // 2:
            checkpoint = value
    plateaued = checkpoint > 0 and (checkpoint - value) / checkpoint < 0.05
    return plateaued, value


def _product_diameter(product):
    best = Fraction(0)
    for i in range(len(product)):
        for j in range(i + 1, len(product)):
            dist = l1_dist(product[i], product[j])
            if dist > best:
                best = dist
    return best


def _require_primitive_levels(d, depth):
    for n in range(1, depth + 1):
        a = transpose(d.incidence(n))
        if len(a) != len(a[0]):
            raise RankError("criterion needs square incidence matrices")
        if not is_primitive(a):
            raise PrimitivityError(f"incidence transpose at level {n} "
                                   "is not primitive")


def _tau_product(d, depth, bases=(1, 2, 3)):
    _require_primitive_levels(d, depth)
    traces = {}
    for m in (b for b in bases if b < depth):
        product = transpose(d.incidence(m))
        taus = []
        for n in range(m + 1, depth + 1):
            product = mat_mul(product, transpose(d.incidence(n)))
            if not is_primitive(product):
                raise PrimitivityError(
                    f"product from level {m} to {n} is not primitive")
            taus.append(float(contraction_stats(product).tau))
        traces[m] = taus
    payload = {"traces": {str(k): v for k, v in traces.items()}}
    shrunk = [t[-1] < 0.05 and (t[0] == 0 or t[-1] < 0.05 * t[0])
              for t in traces.values()]
    if all(shrunk):
        return Verdict.evidence(UE, depth, **payload,
                                note="contraction coefficients vanish")
    if any(_plateaued(t) and t[-1] > 0.05 for t in traces.values()):
        return Verdict.evidence("not " + UE, depth, **payload,
                                note="a contraction trace plateaus above zero")
    return Verdict.inconclusive(UE, depth, **payload)


def _phi_sum(d, depth):
    _require_primitive_levels(d, depth)
    trace, sums, acc = [], [], 0.0
    for n in range(1, depth + 1):
        phi = contraction_stats(transpose(d.incidence(n))).phi
        trace.append(phi)
        acc += math.sqrt(float(phi))
        sums.append(acc)
    rule = d.rule
    if isinstance(rule, ExpressionRule):
        polys = rule.entry_polys()
        if any(p.is_zero for row in polys for p in row):
            phi_fn = RatFn(Poly())
        else:
            k = len(polys)
            quads = []
            for i in range(k):
                for j in range(k):
                    for r in range(k):
                        for s in range(k):
                            # transposed entries: a_ij = polys[j][i]
                            quads.append(RatFn(polys[j][i] * polys[s][r],
                                               polys[j][r] * polys[s][i]))
            phi_fn = eventual_min(quads)
        conv = series_converges(phi_fn, power=Fraction(1, 2))
        payload = {"summand": f"sqrt({phi_fn})", "partial_sums": sums,
                   "trace": trace}
        if conv is False:
            return Verdict.proved(UE, depth, **payload,
                                  rule="divergent sqrt(phi) sum")
        if conv is True:
            return Verdict.inconclusive(UE, depth, **payload,
                                        note="sqrt(phi) sum converges; the "
                                             "sufficient condition does not apply")
    payload = {"partial_sums": sums, "trace": trace}
    if _growth_evidence(sums):
        return Verdict.evidence(UE, depth, **payload)
    return Verdict.inconclusive(UE, depth, **payload)


def _ratio_sum(d, depth):
    _require_primitive_levels(d, depth)
    trace, sums, acc = [], [], Fraction(0)
    for n in range(1, depth + 1):
        entries = [x for row in d.incidence(n) for x in row]
        term = Fraction(min(entries), max(entries))
        trace.append(term)
        acc += term
        sums.append(acc)
    rule = d.rule
    if isinstance(rule, ExpressionRule):
        flat = [RatFn(p) for row in rule.entry_polys() for p in row]
        term_fn = eventual_min(flat) / eventual_max(flat)
        conv = series_converges(term_fn)
        payload = {"summand": str(term_fn), "partial_sums": sums,
                   "trace": trace}
        if conv is False:
            return Verdict.proved(UE, depth, **payload,
                                  rule="divergent min/max entry sum")
        if conv is True:
            return Verdict.inconclusive(UE, depth, **payload,
                                        note="min/max entry sum converges; the "
                                             "sufficient condition does not apply")
    payload = {"partial_sums": sums, "trace": trace}
    if _growth_evidence(sums):
        return Verdict.evidence(UE, depth, **payload)
    return Verdict.inconclusive(UE, depth, **payload)


def _norm_growth(d, depth):
    _require_primitive_levels(d, depth)
    trace = []
    for n in range(1, depth + 1):
        total = sum(x for row in d.incidence(n) for x in row)
        trace.append(Fraction(total, n))
    rule = d.rule
    if isinstance(rule, ExpressionRule):
        total_poly = Poly()
        for row in rule.entry_polys():
            for p in row:
                total_poly = total_poly + p
        payload = {"norm": str(total_poly), "trace": trace}
        if total_poly.degree <= 1:
            return Verdict.proved(UE, depth, **payload,
                                  rule="incidence norm grows at most linearly")
        return Verdict.inconclusive(UE, depth, **payload,
                                    note="norm grows superlinearly; the "
                                         "sufficient condition does not apply")
    payload = {"trace": trace}
    if max(trace) <= trace[0] * 2:
        return Verdict.evidence(UE, depth, **payload,
                                note="norm/level ratio stays bounded on the prefix")
    return Verdict.inconclusive(UE, depth, **payload)


# -- exact measure count ------------------------------------------------------


def exact_count_determinant(d: BratteliDiagram, depth: int = 32) -> Verdict:
    """Exactly-K test via determinants of the stochastic matrices.

    Requires constant rank K and (eventually) nonsingular levels.  On rule
    diagrams the determinant defect 1 - |z(n)| is a rational function and
    the verdict is exact; finitely many singular levels at the start are
    absorbed into the root by an implicit telescoping, which preserves the
    measure set (the skipped levels are reported).  Persistent singularity
    raises SingularError.
    """
    from .linalg import det

    sizes = {d.num_vertices(n) for n in range(1, depth + 2)}
    if len(sizes) != 1:
        raise RankError("determinant criterion needs constant rank")
    k = sizes.pop()
    direction = f"exactly {k} ergodic measures"

    dets = []
    for n in range(1, depth + 1):
        dets.append(det(d.stochastic(n)))

    sym = _symbolic_stochastic(d)
    if sym is not None:
        entries, r = sym
        z = RatFn(_poly_det(d.rule.entry_polys()), r ** k)
        if z.num.is_zero:
            raise SingularError("stochastic matrices are singular at every "
                                "level", level=None)
        sign = z.eventual_sign()
        defect = RatFn.const(1) - (z if sign > 0 else RatFn(Poly()) - z)
        conv = series_converges(defect)
        skipped = [n + 1 for n, value in enumerate(dets) if value == 0]
        payload = {"defect": str(defect), "determinants": dets,
                   "skipped_singular_levels": skipped}
        if skipped:
            payload["note"] = ("singular levels absorbed into the root "
                               "by telescoping")
        if conv is True:
            return Verdict.proved(direction, depth, **payload)
        if conv is False:
            payload["reason"] = ("determinant defects diverge, so there "
                                 "are fewer measures")
            return Verdict.refuted(direction, depth, **payload)

    for n, value in enumerate(dets, start=1):
        if value == 0:
            raise SingularError(
                f"stochastic matrix at level {n} is singular", level=n)
    sums, acc = [], Fraction(0)
    for value in dets:
        acc += 1 - abs(value)
        sums.append(acc)
    payload = {"determinants": dets, "partial_sums": sums}
    growing = _growth_evidence(sums)
    if growing is False or (sums and float(sums[-1]) < 0.5):
        return Verdict.evidence(direction, depth, **payload)
    if growing:
        return Verdict.evidence("fewer than rank", depth, **payload)
    return Verdict.inconclusive(direction, depth, **payload)


def _poly_det(entries):
    """Leibniz determinant of a small matrix of polynomials."""
    from itertools import permutations

    k = len(entries)
    total = Poly()
    for perm in permutations(range(k)):
        sign = 1
        seen = list(perm)
        for i in range(k):
            for j in range(i + 1, k):
                if seen[i] > seen[j]:
                    sign = -sign
        term = Poly.const(sign)
        for i in range(k):
            term = term * entries[i][perm[i]]
        total = total + term
    return total
