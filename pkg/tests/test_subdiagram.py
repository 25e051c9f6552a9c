from fractions import Fraction

import pytest

from bratteli.catalog import countable_chain, two_vertex
from bratteli.errors import (InfiniteExtensionError, InvarianceError,
                             StructureError)
from bratteli.io import load_subdiagram_spec
from bratteli.linalg import l1_dist
from bratteli.measures import (TowerMeasure, bernoulli_measure,
                               check_invariance, count_measures,
                               odometer_measure)
from bratteli.subdiagram import (EdgeSpec, VertexSpec, extend_measure,
                                 extension_test, restrict, sub_heights,
                                 thinness_test)
from bratteli.verdict import Status

W0 = VertexSpec.constant([0])


class TestRestrict:
    def test_linear_family_first_vertex_is_factorial_odometer(
            self, symmetric_linear):
        sub = restrict(symmetric_linear, W0, depth=10)
        assert sub.num_vertices(5) == 1
        for n in range(1, 9):
            assert sub.heights(n + 1) == (sub.heights(n)[0] * n,)

    def test_identity_restriction(self, symmetric_quadratic):
        spec = VertexSpec.constant([0, 1])
        sub = restrict(symmetric_quadratic, spec, depth=8)
        assert sub.materialize(6) == symmetric_quadratic.materialize(6)

    def test_growing_band_settle_zero_is_odometer(self, growing_band):
        sub = restrict(growing_band, VertexSpec.settle(0), depth=12)
        assert all(sub.num_vertices(n) == 1 for n in range(1, 10))
        for n in range(2, 10):
            a = growing_band.incidence(n)[0][0]
            assert sub.heights(n + 1)[0] == sub.heights(n)[0] * a

    def test_retained_vertex_losing_edges_rejected(self):
        d = two_vertex("n")
        prefix_d = restrict(d, VertexSpec.constant([0, 1]), depth=6)
        bad = EdgeSpec((((1, 1), (1, 0)), ((0, 2), (1, 1))))
        with pytest.raises(StructureError):
            restrict(prefix_d, bad)

    def test_edge_spec_must_not_exceed_multiplicities(self, symmetric_linear):
        bad = EdgeSpec((((9, 1), (1, 1)),))
        with pytest.raises(StructureError):
            restrict(symmetric_linear, bad)

    def test_sub_heights_keyed_by_ambient_vertex(self, growing_band):
        heights = sub_heights(growing_band, VertexSpec.settle(2), 5)
        assert set(heights) == {2}

    def test_spec_file_round_trip(self, tmp_path):
        import json
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(
            {"kind": "vertex", "W": {"scheme": "constant",
                                     "vertices": [0]}}))
        spec = load_subdiagram_spec(path)
        assert spec.retained(3) == (0,)
        path.write_text(json.dumps(
            {"kind": "vertex", "W": {"scheme": "settle", "vertex": 2}}))
        spec = load_subdiagram_spec(path)
        assert spec.retained(1) == (1,) and spec.retained(9) == (2,)
        path.write_text(json.dumps(
            {"kind": "vertex", "W": [[0], [0, 1], [1]]}))
        spec = load_subdiagram_spec(path)
        assert spec.retained(2) == (0, 1)


class TestThinness:
    def test_linear_family_proved_thin(self, symmetric_linear):
        v = thinness_test(symmetric_linear, W0, depth=20)
        assert v.status == Status.PROVED
        trace = v.payload["ratio_trace"]
        assert trace[4] == Fraction(1, 5)       # (n-1)!/n! at n = 5

    def test_quadratic_family_refuted(self, symmetric_quadratic):
        v = thinness_test(symmetric_quadratic, W0, depth=20)
        assert v.status == Status.REFUTED
        assert float(v.payload["ratio_trace"][-1]) > 0.63

    def test_full_subdiagram_refuted(self, symmetric_quadratic):
        v = thinness_test(symmetric_quadratic, VertexSpec.constant([0, 1]),
                          depth=10)
        assert v.status == Status.REFUTED
        assert v.payload["reason"] == "full height fraction"

    def test_nonsimple_vertex_case_inconclusive(
            self, lower_triangular_stationary):
        v = thinness_test(lower_triangular_stationary,
                          VertexSpec.constant([1]), depth=12)
        assert v.status == Status.INCONCLUSIVE
        assert "simple" in v.payload["note"]

    def test_growing_band_settle_not_thin(self, growing_band):
        v = thinness_test(growing_band, VertexSpec.settle(0), depth=16)
        assert v.status == Status.REFUTED


class TestExtension:
    def test_linear_family_infinite_by_thinness(self, symmetric_linear):
        sub = restrict(symmetric_linear, W0, depth=20)
        report = extension_test(symmetric_linear, W0, odometer_measure(sub),
                                depth=16)
        ext = report.extension
        assert ext.status == Status.REFUTED
        assert ext.payload["forced_by"] == "thinness"
        # the entering-mass series itself also diverges (terms are all one)
        assert report.series_entering[-1] == 16

    def test_quadratic_family_finite(self, symmetric_quadratic):
        sub = restrict(symmetric_quadratic, W0, depth=20)
        report = extension_test(symmetric_quadratic, W0,
                                odometer_measure(sub), depth=16)
        assert report.extension.status == Status.PROVED
        assert report.verdicts["equivalent_series"].status == Status.PROVED
        assert report.verdicts["sufficient"].status == Status.PROVED
        assert report.verdicts["sufficient"].payload["summand"] == \
            "(1) / (n^2 + 1)"

    def test_growing_band_settled_odometers_finite(self, growing_band):
        for i in range(3):
            spec = VertexSpec.settle(i)
            sub = restrict(growing_band, spec, depth=20)
            report = extension_test(growing_band, spec,
                                    odometer_measure(sub), depth=16)
            assert report.extension.status == Status.PROVED

    def test_three_series_agree(self, symmetric_quadratic, growing_band):
        for d, spec in ((symmetric_quadratic, W0),
                        (growing_band, VertexSpec.settle(1))):
            sub = restrict(d, spec, depth=18)
            report = extension_test(d, spec, odometer_measure(sub), depth=14)
            assert report.series_entering == report.series_increment
            ratio = float(report.series_tower[-1]) / \
                float(report.series_entering[-1])
            assert 1 / 50 < ratio < 50

    def test_thin_never_proved_finite(self, symmetric_linear,
                                      symmetric_quadratic, growing_band):
        cases = [(symmetric_linear, W0), (symmetric_quadratic, W0),
                 (growing_band, VertexSpec.settle(0))]
        for d, spec in cases:
            sub = restrict(d, spec, depth=18)
            report = extension_test(d, spec, odometer_measure(sub), depth=14)
            thin = report.verdicts["thinness"]
            ext = report.extension
            assert not (thin.status == Status.PROVED and
                        ext.status == Status.PROVED)

    def test_invariance_checked(self, symmetric_quadratic):
        sub = restrict(symmetric_quadratic, W0, depth=12)
        bad = TowerMeasure.from_evaluator(
            sub, lambda n: (Fraction(1, 2) if n == 3 else Fraction(1),))
        with pytest.raises(InvarianceError):
            extension_test(symmetric_quadratic, W0, bad, depth=8)


class TestExtendMeasure:
    def test_exact_invariance(self, symmetric_quadratic):
        sub = restrict(symmetric_quadratic, W0, depth=22)
        ext = extend_measure(symmetric_quadratic, W0, odometer_measure(sub),
                             depth=15)
        assert check_invariance(ext, 15).ok

    def test_identity_on_full_spec(self, binomial_diagram):
        spec = VertexSpec.from_function(
            lambda n: tuple(range(n + 1)))
        mu = bernoulli_measure(binomial_diagram, Fraction(1, 3))
        ext = extend_measure(binomial_diagram, spec, mu, depth=10,
                             require_proof=False)
        for n in range(1, 11):
            assert ext.q(n) == mu.q(n)

    def test_matches_cluster_representative(self, symmetric_quadratic):
        depth = 30
        sub = restrict(symmetric_quadratic, W0, depth=depth + 4)
        ext = extend_measure(symmetric_quadratic, W0, odometer_measure(sub),
                             depth=depth + 1)
        rep = count_measures(symmetric_quadratic, depth=depth - 2,
                             radius=Fraction(1, 10), base=2)
        q2 = ext.q(2)
        assert any(l1_dist(q2, r) < Fraction(1, 10 ** 6)
                   for r in rep.representatives)

    def test_infinite_extension_refused(self, symmetric_linear):
        sub = restrict(symmetric_linear, W0, depth=18)
        with pytest.raises(InfiniteExtensionError):
            extend_measure(symmetric_linear, W0, odometer_measure(sub),
                           depth=12)

    def test_growing_band_extension_invariant_to_fifteen(self, growing_band):
        spec = VertexSpec.settle(0)
        sub = restrict(growing_band, spec, depth=20)
        ext = extend_measure(growing_band, spec, odometer_measure(sub),
                             depth=15)
        assert check_invariance(ext, 15).ok


class TestEdgeSubdiagram:
    def test_reduced_multiplicities(self):
        d = two_vertex("n")
        spec = EdgeSpec(tuple(
            tuple(tuple(max(x - (1 if v == w == 0 and x > 1 else 0), 0)
                        for w, x in enumerate(row))
                  for v, row in enumerate(d.incidence(n)))
            for n in range(1, 9)))
        sub = restrict(d, spec)
        for n in range(2, 8):
            expected = d.incidence(n)[0][0] - 1
            assert sub.incidence(n)[0][0] == expected
        v = thinness_test(d, spec, depth=7)
        assert v.status in (Status.EVIDENCE, Status.INCONCLUSIVE,
                            Status.REFUTED)

    def test_extension_series_defined(self):
        d = two_vertex("n")
        matrices = []
        for n in range(1, 10):
            m = [list(row) for row in d.incidence(n)]
            m[0][1] = 0     # cut the edges from vertex 1 into vertex 0
            matrices.append(tuple(tuple(row) for row in m))
        spec = EdgeSpec(tuple(matrices))
        sub = restrict(d, spec)
        q = TowerMeasure.from_evaluator(
            sub, lambda n: (Fraction(1, 2), Fraction(1, 2)))
        if check_invariance(q, 8).ok:
            report = extension_test(d, spec, q, depth=6)
            assert len(report.series_entering) == 6
