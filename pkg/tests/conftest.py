"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bratteli.catalog import (countable_chain, odometer, pascal, stationary,
                              two_vertex)
from bratteli.diagram import BratteliDiagram


def random_prefix_diagram(rng: random.Random, size: int, depth: int = 6,
                          max_entry: int = 4) -> BratteliDiagram:
    """Rule-free diagram with constant rank and valid structure."""
    while True:
        root = [rng.randint(1, max_entry) for _ in range(size)]
        levels = []
        ok = True
        for _ in range(depth):
            m = [[rng.randint(0, max_entry) for _ in range(size)]
                 for _ in range(size)]
            if any(all(x == 0 for x in row) for row in m) or \
                    any(all(row[j] == 0 for row in m) for j in range(size)):
                ok = False
                break
            levels.append(m)
        if not ok:
            continue
        try:
            return BratteliDiagram(root, levels, name="random")
        except Exception:
            continue


def basis_product_oracle(d: BratteliDiagram, base: int, depth: int):
    """Independent recomputation of the slice vertex vectors: iterate the
    transposed stochastic matrices on each standard basis vector."""
    deep = base + depth + 1
    k = d.num_vertices(deep)
    out = []
    for v in range(k):
        vec = [Fraction(1) if i == v else Fraction(0) for i in range(k)]
        for n in range(base + depth, base - 1, -1):
            f = d.stochastic(n)
            vec = [sum(f[i][w] * vec[i] for i in range(len(f)))
                   for w in range(len(f[0]))]
        out.append(tuple(vec))
    return out


@pytest.fixture
def symmetric_linear():
    """Rank-2 family with linear diagonal growth: uniquely ergodic."""
    return two_vertex("n")


@pytest.fixture
def symmetric_quadratic():
    """Rank-2 family with quadratic diagonal growth: two ergodic measures."""
    return two_vertex("n^2")


@pytest.fixture
def lower_triangular_stationary():
    """Stationary [[3,0],[1,2]] with heights 3^n: one finite measure on
    the embedded 3-odometer."""
    return stationary([[3, 0], [1, 2]], root_edges=(3, 3),
                      name="triangular32")


@pytest.fixture
def binomial_diagram():
    return pascal()


@pytest.fixture
def growing_band():
    return countable_chain("n^3")


@pytest.fixture
def odometer3():
    return odometer(3)
