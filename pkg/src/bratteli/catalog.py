"""Catalog of the diagram families used throughout the test corpus.

Every family is a fully validated diagram with a generation rule attached,
so any level can be materialized on demand.  Growth parameters are given
as expression strings in the level variable n ("n", "n^2", "n^3-1", ...).
"""

from __future__ import annotations

from .diagram import BratteliDiagram
from .errors import ParamError
from .polyrat import N, Poly, RatFn, series_converges
from .rules import ChainRule, ExpressionRule, PascalRule, _coerce_poly


def odometer(base=2, bases=None, name="") -> BratteliDiagram:
    """Single vertex per level; ``bases`` gives a varying digit sequence
    materialized as a prefix, otherwise ``base`` repeats forever."""
    if bases is not None:
        bases = [int(b) for b in bases]
        if any(b < 1 for b in bases):
            raise ParamError("odometer digits must be positive")
        return BratteliDiagram([bases[0]], [[[b]] for b in bases[1:]],
                               name=name or "odometer")
    if base < 1:
        raise ParamError("odometer base must be positive")
    rule = ExpressionRule.from_strings([[str(int(base))]])
    return BratteliDiagram([int(base)], rule=rule,
                           name=name or f"odometer{base}")


def two_vertex(entry="n", name="") -> BratteliDiagram:
    """Symmetric rank-2 family [[a(n), 1], [1, a(n)]] with root edges (1,1)."""
    a = _coerce_poly(entry)
    rule = ExpressionRule((( a, Poly.const(1)), (Poly.const(1), a)))
    return BratteliDiagram([1, 1], rule=rule,
                           name=name or f"two_vertex[{a}]")


def ers(entries, from_level=1, root_edges=None, name="") -> BratteliDiagram:
    """Constant-shape rule diagram, required to have equal row sums."""
    rule = ExpressionRule.from_strings(entries, from_level)
    if rule.ers_row_sum() is None:
        raise ParamError("entries do not have the equal-row-sum property")
    k = rule.shape(from_level)[1]
    root = list(root_edges) if root_edges is not None else [1] * k
    return BratteliDiagram(root, rule=rule, name=name or "ers")


def stationary(matrix, root_edges=None, name="") -> BratteliDiagram:
    """One integer incidence matrix repeated at every level."""
    rows = [[str(int(x)) for x in row] for row in matrix]
    if len(rows) != len(rows[0]):
        raise ParamError("a stationary diagram needs a square matrix")
    rule = ExpressionRule.from_strings(rows)
    root = list(root_edges) if root_edges is not None else [1] * len(rows)
    return BratteliDiagram(root, rule=rule, name=name or "stationary")


def pascal(name="") -> BratteliDiagram:
    """Binomial-band diagram: n+1 vertices at level n, heights C(n, i)."""
    return BratteliDiagram([1, 1], rule=PascalRule(), name=name or "pascal")


def countable_chain(entry="n^3", name="") -> BratteliDiagram:
    """Growing band with diagonal a(n); admissible only when the off-band
    mass sum n / (a(n) + n) converges, decided by the exact degree test."""
    a = _coerce_poly(entry)
    term = RatFn(N, a + N)
    if series_converges(term) is not True:
        raise ParamError(
            f"sum of n/({a}+n) does not converge; the family needs a "
            "faster-growing diagonal")
    return BratteliDiagram([1, 1], rule=ChainRule(a),
                           name=name or f"countable_chain[{a}]")


_FAMILIES = {
    "odometer": odometer,
    "two_vertex": two_vertex,
    "ers": ers,
    "stationary": stationary,
    "pascal": pascal,
    "countable_chain": countable_chain,
}


def catalog(family: str, **params) -> BratteliDiagram:
    """Build a named family; raises ParamError for unknown names or
    inadmissible parameters."""
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise ParamError(f"unknown family {family!r}; have "
                         f"{sorted(_FAMILIES)}") from None
    return builder(**params)
