"""Lattice combinatorics: enumeration, Kreweras, Moebius.

Brute-force oracles live here: the Kreweras complement is re-derived by
exhaustive search over compatible complements, and the Moebius function
is pinned by its defining interval recursion.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freestein import ncpart
from freestein.ncpart import NcPartition

# B_0..B_10 and C_0..C_10, by hand / Bell triangle
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]
CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796]


def interlace(p: NcPartition, comp_blocks) -> NcPartition:
    """Partition of [2n] with p on odd points and comp_blocks on even."""
    blocks = [tuple(2 * e - 1 for e in b) for b in p.blocks]
    blocks += [tuple(2 * e for e in b) for b in comp_blocks]
    return NcPartition(2 * p.n, blocks)


def brute_kreweras(p: NcPartition) -> NcPartition:
    """Oracle: the maximal complement sigma with p union sigma non-crossing."""
    best = None
    for sigma in ncpart.enumerate_nc(p.n):
        if ncpart.is_noncrossing(interlace(p, sigma.blocks)):
            if best is None or ncpart.leq(best, sigma):
                best = sigma
    # maximality, not just a maximal chain endpoint
    for sigma in ncpart.enumerate_nc(p.n):
        if ncpart.is_noncrossing(interlace(p, sigma.blocks)):
            assert ncpart.leq(sigma, best)
    return best


class TestEnumeration:
    @pytest.mark.parametrize("n", range(1, 8))
    def test_bell_counts(self, n):
        assert len(ncpart.enumerate_partitions(n)) == BELL[n]

    @pytest.mark.parametrize("n", range(1, 9))
    def test_catalan_counts(self, n):
        parts = ncpart.enumerate_nc(n)
        assert len(parts) == CATALAN[n]
        assert len(set(parts)) == len(parts)
        assert all(ncpart.is_noncrossing(p) for p in parts)

    def test_n1(self):
        assert ncpart.enumerate_partitions(1) == [NcPartition(1, [(1,)])]

    def test_nc_filter_agrees(self):
        # non-crossing enumeration matches filtering all partitions
        for n in range(1, 7):
            filtered = {p for p in ncpart.enumerate_partitions(n) if ncpart.is_noncrossing(p)}
            assert filtered == set(ncpart.enumerate_nc(n))

    def test_unique_crossing_at_4(self):
        parts = ncpart.enumerate_partitions(4)
        assert len(parts) == 15
        crossing = [p for p in parts if not ncpart.is_noncrossing(p)]
        assert crossing == [NcPartition(4, [(1, 3), (2, 4)])]

    def test_nc2_order(self):
        assert ncpart.enumerate_nc(2) == [NcPartition.zero(2), NcPartition.one(2)]

    def test_nc_endpoints(self):
        for n in (3, 5):
            parts = ncpart.enumerate_nc(n)
            assert parts[0] == NcPartition.zero(n)
            assert parts[-1] == NcPartition.one(n)

    def test_partitions_rgs_lex_order(self):
        parts = ncpart.enumerate_partitions(4)
        rgs = [p.rgs() for p in parts]
        assert rgs == sorted(rgs)

    @pytest.mark.parametrize("n", [0, 13])
    def test_enumeration_bounds(self, n):
        with pytest.raises(ValueError):
            ncpart.enumerate_partitions(n)
        with pytest.raises(ValueError):
            ncpart.enumerate_nc(n)


class TestCrossing:
    def test_nested_blocks(self):
        assert ncpart.is_noncrossing(NcPartition(3, [(1, 2), (3,)]))

    def test_interleaved(self):
        assert not ncpart.is_noncrossing(NcPartition(4, [(1, 3), (2, 4)]))

    def test_single_block(self):
        for n in (1, 4, 7):
            assert ncpart.is_noncrossing(NcPartition.one(n))

    def test_bad_blocks_rejected(self):
        with pytest.raises(ValueError):
            NcPartition(3, [(1, 2), (2, 3)])
        with pytest.raises(ValueError):
            NcPartition(3, [(1, 2)])
        with pytest.raises(ValueError):
            NcPartition.noncrossing(4, [(1, 3), (2, 4)])


class TestOrder:
    def test_zero_below_everything(self):
        for q in ncpart.enumerate_nc(5):
            assert ncpart.leq(NcPartition.zero(5), q)

    def test_one_not_below_zero(self):
        assert not ncpart.leq(NcPartition.one(2), NcPartition.zero(2))

    def test_refinement_example(self):
        assert ncpart.leq(NcPartition(3, [(1,), (2, 3)]), NcPartition.one(3))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ncpart.leq(NcPartition.zero(3), NcPartition.zero(4))

    @pytest.mark.parametrize("n", range(2, 7))
    def test_partial_order_axioms(self, n):
        lat = ncpart.enumerate_nc(n)
        for p in lat:
            assert ncpart.leq(p, p)
        import random

        rng = random.Random(n)
        for _ in range(300):
            p, q, r = (rng.choice(lat) for _ in range(3))
            if ncpart.leq(p, q) and ncpart.leq(q, p):
                assert p == q
            if ncpart.leq(p, q) and ncpart.leq(q, r):
                assert ncpart.leq(p, r)


class TestKreweras:
    def test_extremes(self):
        for n in (1, 3, 6):
            assert ncpart.kreweras(NcPartition.zero(n)) == NcPartition.one(n)
            assert ncpart.kreweras(NcPartition.one(n)) == NcPartition.zero(n)

    def test_n3_example(self):
        # brute force over the interlaced alphabet 1,1',2,2',3,3'
        assert ncpart.kreweras(NcPartition(3, [(1, 2), (3,)])) == NcPartition(
            3, [(1,), (2, 3)]
        )

    @pytest.mark.parametrize("n", range(1, 7))
    def test_matches_brute_force(self, n):
        for p in ncpart.enumerate_nc(n):
            assert ncpart.kreweras(p) == brute_kreweras(p)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_rank_identity(self, n):
        for p in ncpart.enumerate_nc(n):
            assert len(p) + len(ncpart.kreweras(p)) == n + 1

    def test_crossing_rejected(self):
        with pytest.raises(ValueError):
            ncpart.kreweras(NcPartition(4, [(1, 3), (2, 4)]))


class TestMobius:
    def test_reflexive_base(self):
        for p in ncpart.enumerate_nc(4):
            assert ncpart.mobius(p, p) == 1

    def test_nc2_chain(self):
        assert ncpart.mobius(NcPartition.zero(2), NcPartition.one(2)) == -1

    @pytest.mark.parametrize("n,expected", [(3, 2), (4, -5)])
    def test_bottom_to_top_small(self, n, expected):
        assert ncpart.mobius(NcPartition.zero(n), NcPartition.one(n)) == expected

    @pytest.mark.parametrize("n", range(1, 8))
    def test_bottom_to_top_catalan_law(self, n):
        v = ncpart.mobius(NcPartition.zero(n), NcPartition.one(n))
        assert v == (-1) ** (n - 1) * ncpart.catalan(n - 1)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_recursion_closure(self, n):
        lat = ncpart.enumerate_nc(n)
        for p in lat:
            for q in lat:
                if p != q and ncpart.leq(p, q):
                    total = sum(
                        ncpart.mobius(p, s) for s in lat if ncpart.leq(p, s) and ncpart.leq(s, q)
                    )
                    assert total == 0, (p, q)

    def test_order_violation(self):
        with pytest.raises(ValueError):
            ncpart.mobius(NcPartition.one(3), NcPartition.zero(3))

    @pytest.mark.parametrize("n", range(1, 7))
    def test_multiplicative_shortcut_matches_recursion(self, n):
        top = NcPartition.one(n)
        for p in ncpart.enumerate_nc(n):
            assert ncpart.mobius_to_top(p) == ncpart.mobius(p, top)


class TestCatalanBell:
    def test_catalan_values(self):
        assert [ncpart.catalan(n) for n in range(11)] == CATALAN
        assert ncpart.catalan(10) == len(ncpart.enumerate_nc(10))

    def test_catalan_exact_integer(self):
        for n in range(31):
            c = ncpart.catalan(n)
            assert isinstance(c, int)
            assert c * (n + 1) == math.comb(2 * n, n)

    def test_catalan_bounds(self):
        with pytest.raises(ValueError):
            ncpart.catalan(31)
        with pytest.raises(ValueError):
            ncpart.catalan(-1)

    def test_bell_values(self):
        assert [ncpart.bell(n) for n in range(11)] == BELL


class TestTypeCounts:
    @pytest.mark.parametrize("n", range(1, 10))
    def test_against_enumeration(self, n):
        counted = {}
        for p in ncpart.enumerate_nc(n):
            counted[p.block_sizes()] = counted.get(p.block_sizes(), 0) + 1
        assert ncpart.nc_type_counts(n) == counted

    def test_totals(self):
        for n in range(1, 13):
            assert sum(ncpart.nc_type_counts(n).values()) == ncpart.catalan(n)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.data())
def test_kreweras_size_pairs_consistent(n, data):
    pairs = ncpart.nc_kreweras_size_pairs(n)
    assert len(pairs) == ncpart.catalan(n)
    sizes_pi, sizes_k = data.draw(st.sampled_from(pairs))
    assert sum(sizes_pi) == n and sum(sizes_k) == n
    assert len(sizes_pi) + len(sizes_k) == n + 1
