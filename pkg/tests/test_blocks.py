from fractions import Fraction

import pytest

from bratteli.blocks import BlockPartition, blocks_analysis, chain_analysis
from bratteli.catalog import stationary, two_vertex
from bratteli.errors import PartitionError
from bratteli.verdict import Status


class TestBlockPartition:
    def test_constant_layout(self):
        p = BlockPartition.constant([(0,), (1, 2)], zero=(3,))
        blocks, zero = p.at(5, 4)
        assert blocks == [(0,), (1, 2)] and zero == (3,)

    def test_empty_block_raises(self):
        p = BlockPartition.constant([(), (0, 1)])
        with pytest.raises(PartitionError):
            p.at(1, 2)

    def test_coverage_enforced(self):
        p = BlockPartition.constant([(0,)])
        with pytest.raises(PartitionError):
            p.at(1, 3)

    def test_singletons_grow_with_level(self):
        p = BlockPartition.singletons()
        blocks, zero = p.at(4, 5)
        assert blocks == [(v,) for v in range(5)] and zero == ()


class TestBlocksAnalysis:
    def test_quadratic_singleton_blocks(self, symmetric_quadratic):
        rep = blocks_analysis(
            symmetric_quadratic, BlockPartition.constant([(0,), (1,)]),
            depth=20)
        assert rep.conditions["a"].status == Status.PROVED
        assert rep.conditions["b"].status == Status.PROVED
        for sub in rep.conditions["c"]:
            assert sub.status == Status.PROVED
            assert "n^2" in sub.payload["summand"]
        assert rep.conditions["d"].status == Status.PROVED
        assert rep.conditions["e1"].status == Status.PROVED   # no leftover
        assert rep.conditions["e2"].status == Status.PROVED

    def test_linear_family_offblock_mass_diverges(self, symmetric_linear):
        rep = blocks_analysis(
            symmetric_linear, BlockPartition.constant([(0,), (1,)]),
            depth=20)
        assert all(sub.status == Status.REFUTED
                   for sub in rep.conditions["c"])

    def test_triangular_with_leftover(self, lower_triangular_stationary):
        rep = blocks_analysis(
            lower_triangular_stationary,
            BlockPartition.constant([(0,)], zero=(1,)), depth=20)
        c = rep.conditions["c"][0]
        assert c.status == Status.PROVED
        assert all(t == 0 for t in c.payload["trace"])
        e2 = rep.conditions["e2"]
        assert e2.status == Status.EVIDENCE
        assert e2.payload["margin"] == Fraction(2, 3)
        assert rep.conditions["e1"].status in (Status.EVIDENCE,
                                               Status.INCONCLUSIVE)

    def test_empty_numbered_block_raises(self, symmetric_quadratic):
        with pytest.raises(PartitionError):
            blocks_analysis(symmetric_quadratic,
                            BlockPartition.constant([(), (0, 1)]), depth=6)

    def test_vanishing_blocks_detected(self, symmetric_quadratic,
                                       lower_triangular_stationary):
        rep = blocks_analysis(
            symmetric_quadratic, BlockPartition.constant([(0,), (1,)]),
            depth=20)
        assert (0,) in rep.vanishing_blocks and (1,) in rep.vanishing_blocks
        assert all(v == 1 for v in rep.regularity.values())
        rep = blocks_analysis(
            lower_triangular_stationary,
            BlockPartition.constant([(0,), (1,)]), depth=20)
        assert (0,) in rep.vanishing_blocks
        assert (1,) not in rep.vanishing_blocks

    def test_linear_family_vanishing_but_not_summable(self,
                                                      symmetric_linear):
        # inflow 1/(n+1) tends to zero, so the singletons are vanishing
        # blocks, yet the off-block series diverges: vanishing alone does
        # not create a second measure
        rep = blocks_analysis(
            symmetric_linear, BlockPartition.constant([(0,), (1,)]),
            depth=20)
        assert (0,) in rep.vanishing_blocks
        assert all(sub.status == Status.REFUTED
                   for sub in rep.conditions["c"])


class TestChainAnalysis:
    def test_growing_band_counts(self, growing_band):
        rep = chain_analysis(growing_band, BlockPartition.singletons(),
                             depth=10)
        assert rep.start_level == 2
        assert len(rep.prefixes) >= 10
        assert rep.growing_family
        c1 = rep.conditions["c1"]
        assert c1.status == Status.PROVED
        assert c1.payload["summand"] == "(n) / (n^3 + n)"
        assert rep.conditions["d1"].status == Status.PROVED

    def test_growing_band_chain_shapes(self, growing_band):
        rep = chain_analysis(growing_band, BlockPartition.singletons(),
                             depth=8)
        # constants and climb-then-settle chains only
        for prefix in rep.prefixes:
            diffs = [b - a for a, b in zip(prefix, prefix[1:])]
            assert all(step in (0, 1) for step in diffs)
            assert all(a <= b for a, b in zip(diffs[::-1], diffs[::-1][1:]))

    def test_binomial_chains_all_die(self, binomial_diagram):
        rep = chain_analysis(binomial_diagram, BlockPartition.singletons(),
                             depth=10)
        assert rep.prefixes == ()
        assert rep.count_claim == 0
        assert len(rep.degenerate) >= 1   # edge chains carry a single path

    def test_constant_rank_reduces_to_blocks(self, symmetric_quadratic):
        rep = chain_analysis(symmetric_quadratic,
                             BlockPartition.constant([(0,), (1,)]), depth=10)
        assert rep.prefixes == ((1,) * 11, (2,) * 11)
        assert rep.count_claim == 2
        assert not rep.growing_family
        assert rep.conditions["c1"].status == Status.PROVED

    def test_linear_family_chain_series_diverges(self, symmetric_linear):
        rep = chain_analysis(symmetric_linear,
                             BlockPartition.constant([(0,), (1,)]), depth=10)
        assert rep.conditions["c1"].status == Status.REFUTED
