import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bratteli.catalog import catalog, countable_chain, odometer, two_vertex
from bratteli.diagram import BratteliDiagram
from bratteli.errors import (ArgumentError, DepthError, ParamError,
                             SchemaError, StructureError)
from bratteli.io import diagram_to_json, load_diagram, save_diagram
from bratteli.linalg import mat_vec
from conftest import random_prefix_diagram


class TestHeights:
    def test_triangular_stationary_powers_of_three(
            self, lower_triangular_stationary):
        for n in range(1, 12):
            assert lower_triangular_stationary.heights(n) == (3 ** n, 3 ** n)

    def test_binomial_coefficients(self, binomial_diagram):
        for n in range(1, 12):
            assert binomial_diagram.heights(n) == \
                tuple(math.comb(n, i) for i in range(n + 1))

    def test_single_vertex_all_ones(self):
        d = odometer(1)
        assert all(d.heights(n) == (1,) for n in range(1, 10))

    def test_recursion_holds_exactly(self, symmetric_linear):
        for n in range(1, 9):
            lhs = symmetric_linear.heights(n + 1)
            rhs = mat_vec(symmetric_linear.incidence(n),
                          symmetric_linear.heights(n))
            assert lhs == tuple(rhs)


class TestStochastic:
    def test_triangular_stationary(self, lower_triangular_stationary):
        assert lower_triangular_stationary.stochastic(4) == (
            (Fraction(1), Fraction(0)),
            (Fraction(1, 3), Fraction(2, 3)))

    def test_symmetric_linear_entries(self, symmetric_linear):
        for n in (2, 5, 9):
            f = symmetric_linear.stochastic(n)
            assert f == ((Fraction(n, n + 1), Fraction(1, n + 1)),
                         (Fraction(1, n + 1), Fraction(n, n + 1)))

    def test_binomial_band_entries(self, binomial_diagram):
        for n in (2, 4, 7):
            f = binomial_diagram.stochastic(n)
            for k in range(n + 2):
                for i in range(n + 1):
                    if i == k - 1:
                        assert f[k][i] == Fraction(k, n + 1)
                    elif i == k:
                        assert f[k][i] == 1 - Fraction(k, n + 1)
                    else:
                        assert f[k][i] == 0

    def test_rows_sum_to_one_exactly(self, growing_band):
        for n in range(1, 8):
            for row in growing_band.stochastic(n):
                assert sum(row) == 1


class TestErs:
    def test_heights_are_row_sum_products(self, symmetric_linear):
        sums = symmetric_linear.ers_row_sums(9)
        assert sums == tuple(n + 1 for n in range(1, 10))
        r0 = symmetric_linear.root_edges[0]
        prod = r0
        for n in range(2, 10):
            prod *= sums[n - 2]
            assert symmetric_linear.heights(n) == (prod, prod)

    def test_non_ers_detected(self, binomial_diagram):
        assert binomial_diagram.ers_row_sums(5) is None


class TestTelescope:
    def test_pairs_of_triangular(self, lower_triangular_stationary):
        t = lower_triangular_stationary.telescope([0, 1, 3, 5, 7])
        assert t.prefix[0] == ((9, 0), (5, 4))
        assert all(m == ((9, 0), (5, 4)) for m in t.prefix)

    def test_identity_sequence(self, symmetric_linear):
        levels = list(range(0, 8))
        t = symmetric_linear.telescope(levels)
        assert t.root_edges == symmetric_linear.root_edges
        assert t.materialize(6) == symmetric_linear.materialize(6)

    def test_heights_preserved(self, symmetric_quadratic):
        t = symmetric_quadratic.telescope([0, 2, 5, 9])
        assert t.heights(1) == symmetric_quadratic.heights(2)
        assert t.heights(2) == symmetric_quadratic.heights(5)
        assert t.heights(3) == symmetric_quadratic.heights(9)

    def test_composition(self):
        rng = random.Random(11)
        d = random_prefix_diagram(rng, 3, depth=8)
        outer = (0, 1, 3, 6, 8)
        inner = (0, 2, 4)
        lhs = d.telescope(outer).telescope(inner)
        composed = tuple(outer[b] for b in inner)
        rhs = d.telescope(composed)
        assert lhs.root_edges == rhs.root_edges
        assert lhs.prefix == rhs.prefix

    def test_rejects_bad_sequences(self, symmetric_linear):
        with pytest.raises(ArgumentError):
            symmetric_linear.telescope([1, 2])
        with pytest.raises(ArgumentError):
            symmetric_linear.telescope([0, 3, 2])


class TestValidation:
    def test_zero_column_rejected(self):
        with pytest.raises(StructureError):
            BratteliDiagram([1, 1], [[[1, 1], [1, 1]], [[1, 0], [2, 0]]])

    def test_zero_row_rejected(self):
        with pytest.raises(StructureError):
            BratteliDiagram([1, 1], [[[0, 0], [1, 1]]])

    def test_shape_chain_enforced(self):
        with pytest.raises(StructureError):
            BratteliDiagram([1, 1], [[[1, 1], [1, 1]], [[1, 1, 1]]])

    def test_disjoint_union_rejected(self):
        with pytest.raises(StructureError):
            BratteliDiagram([1, 1], [[[2, 0], [0, 2]]] * 3)

    def test_connected_through_third_vertex_accepted(self):
        d = BratteliDiagram([1, 1, 1], [[[2, 0, 1], [0, 2, 1], [1, 1, 1]]] * 3)
        assert d.connectivity_checked_depth >= 3

    def test_negative_rule_evaluation(self):
        from bratteli.rules import ExpressionRule
        rule = ExpressionRule.from_strings([["n-3", "1"], ["1", "n"]])
        with pytest.raises(StructureError):
            BratteliDiagram([1, 1], rule=rule)

    def test_depth_error_beyond_prefix(self):
        d = BratteliDiagram([1, 1], [[[1, 1], [1, 1]]])
        with pytest.raises(DepthError):
            d.incidence(5)


class TestFiles:
    def test_round_trip(self, tmp_path, symmetric_linear):
        path = tmp_path / "d.json"
        save_diagram(symmetric_linear, path)
        loaded = load_diagram(path)
        assert loaded.materialize(6) == symmetric_linear.materialize(6)
        assert loaded.root_edges == symmetric_linear.root_edges

    def test_stationary_file(self):
        d = load_diagram({"name": "t", "root_edges": [1, 1],
                          "levels": [[[3, 0], [1, 2]], [[3, 0], [1, 2]]]})
        assert d.heights(3) == (9, 9)

    def test_zero_column_file_rejected(self):
        with pytest.raises(StructureError):
            load_diagram({"root_edges": [1, 1],
                          "levels": [[[1, 1], [1, 1]], [[1, 0], [1, 0]]]})

    def test_rule_file(self):
        d = load_diagram({"root_edges": [1, 1],
                          "rule": {"from_level": 1, "shape": "constant",
                                   "entries": [["n", "1"], ["1", "n"]]}})
        assert d.incidence(4) == ((4, 1), (1, 4))

    def test_malformed_rejected(self, tmp_path):
        with pytest.raises(SchemaError):
            load_diagram({"levels": []})
        with pytest.raises(SchemaError):
            load_diagram({"root_edges": [1], "levels": [[["x"]]]})
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(SchemaError):
            load_diagram(bad)

    def test_order_section_round_trip(self, tmp_path):
        doc = {"root_edges": [2], "levels": [[[2]], [[2]]],
               "order": {"scheme": "reverse"}}
        d = load_diagram(doc)
        assert d.order_spec == {"scheme": "reverse"}
        path = tmp_path / "o.json"
        save_diagram(d, path)
        assert load_diagram(path).order_spec == {"scheme": "reverse"}


class TestCatalog:
    def test_binomial_band_pattern(self, binomial_diagram):
        f = binomial_diagram.incidence(3)
        assert f == ((1, 0, 0, 0), (1, 1, 0, 0), (0, 1, 1, 0),
                     (0, 0, 1, 1), (0, 0, 0, 1))

    def test_growing_band_accepted_by_degree_test(self):
        d = catalog("countable_chain", entry="n^3")
        assert d.incidence(2)[0] == (8, 1, 1)

    def test_growing_band_rejects_slow_growth(self):
        with pytest.raises(ParamError):
            countable_chain("n")

    def test_odometer(self):
        d = catalog("odometer", base=2)
        assert d.num_vertices(5) == 1 and d.incidence(3) == ((2,),)

    def test_varying_odometer(self):
        d = odometer(bases=[2, 3, 4])
        assert d.heights(3) == (24,)

    def test_ers_family_requires_equal_row_sums(self):
        with pytest.raises(ParamError):
            catalog("ers", entries=[["n", "1"], ["1", "n^2"]])

    def test_unknown_family(self):
        with pytest.raises(ParamError):
            catalog("nope")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_random_diagram_invariants(seed, size):
    rng = random.Random(seed)
    d = random_prefix_diagram(rng, size, depth=4)
    for n in range(1, 4):
        assert d.heights(n + 1) == tuple(
            mat_vec(d.incidence(n), d.heights(n)))
        for row in d.stochastic(n):
            assert sum(row) == 1
            assert all(x >= 0 for x in row)


def test_json_export_covers_rules(binomial_diagram, growing_band):
    doc = diagram_to_json(binomial_diagram)
    assert doc["rule"]["shape"] == "pascal"
    doc = diagram_to_json(growing_band)
    assert doc["rule"]["shape"] == "chain"
    assert json.dumps(doc)
