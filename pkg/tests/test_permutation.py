import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mramsim.permutation import (
    DEFAULT_ORDER_8WAY,
    InvalidArgs,
    WritePermutation,
    circular_distances,
    enumerate_valid,
    heat_score,
    max_feasible_min_distance,
    select_default,
)
from mramsim.thermal import HeatKernel


# Independent oracle: recursive construction instead of filter-the-stream.
def ref_valid_orders(ways: int, min_dist: int) -> set[tuple[int, ...]]:
    out: set[tuple[int, ...]] = set()

    def extend(prefix: list[int], remaining: set[int]) -> None:
        if not remaining:
            if abs(prefix[0] - prefix[-1]) >= min_dist:
                out.add(tuple(prefix))
            return
        for nxt in remaining:
            if not prefix or abs(nxt - prefix[-1]) >= min_dist:
                extend(prefix + [nxt], remaining - {nxt})

    extend([], set(range(ways)))
    return out


class _OneOverOnePlusD:
    def way_increment(self, d):
        return 1.0 / (1.0 + d)


class _NullKernel:
    def way_increment(self, d):
        return 0.0


class TestEnumerate:
    def test_eight_ways_min_three_is_176_of_40320(self):
        perms = enumerate_valid(8, 3)
        assert len(perms) == 176
        assert math.factorial(8) == 40_320

    def test_four_ways_min_two_is_empty(self):
        assert enumerate_valid(4, 2) == []

    def test_two_ways(self):
        assert [p.order for p in enumerate_valid(2, 1)] == [(0, 1), (1, 0)]

    @pytest.mark.parametrize("ways", [2, 3, 4, 5, 6])
    def test_min_dist_one_returns_all(self, ways):
        assert len(enumerate_valid(ways, 1)) == math.factorial(ways)

    def test_lexicographic_order(self):
        orders = [p.order for p in enumerate_valid(8, 3)]
        assert orders == sorted(orders)

    @pytest.mark.parametrize("ways,min_dist", [(8, 3), (7, 3), (6, 2), (5, 2)])
    def test_matches_independent_oracle(self, ways, min_dist):
        assert {p.order for p in enumerate_valid(ways, min_dist)} == ref_valid_orders(
            ways, min_dist
        )

    def test_every_result_revalidates(self):
        for p in enumerate_valid(8, 3):
            dists = [abs(p.order[i] - p.order[i - 1]) for i in range(len(p.order))]
            assert min(dists) >= 3
            assert tuple(sorted(dists)) == p.distance_multiset

    def test_closed_under_rotation_and_relabeling(self):
        valid = {p.order for p in enumerate_valid(8, 3)}
        for order in valid:
            rotated = order[1:] + order[:1]
            relabeled = tuple(7 - w for w in order)
            assert rotated in valid
            assert relabeled in valid

    @pytest.mark.parametrize("ways,min_dist", [(1, 1), (8, 0), (8, 8)])
    def test_invalid_args(self, ways, min_dist):
        with pytest.raises(InvalidArgs):
            enumerate_valid(ways, min_dist)


class TestMaxFeasible:
    def test_eight_ways(self):
        assert max_feasible_min_distance(8) == 3
        assert enumerate_valid(8, 4) == []

    def test_two_ways(self):
        assert max_feasible_min_distance(2) == 1

    @pytest.mark.parametrize("ways", [3, 4, 5, 6, 7])
    def test_matches_exhaustive_search(self, ways):
        expected = max(d for d in range(1, ways) if ref_valid_orders(ways, d))
        assert max_feasible_min_distance(ways) == expected


class TestHeatScore:
    def test_null_kernel_scores_zero(self):
        for p in enumerate_valid(8, 3):
            assert heat_score(p, _NullKernel()) == 0.0

    def test_closed_form_example(self):
        p = next(
            p
            for p in enumerate_valid(8, 3)
            if p.distance_multiset == (3, 3, 3, 4, 4, 5, 5, 5)
        )
        assert heat_score(p, _OneOverOnePlusD()) == pytest.approx(1.65, abs=1e-12)

    def test_reversal_invariant(self):
        kernel = HeatKernel()
        for p in enumerate_valid(8, 3)[:20]:
            reversed_p = WritePermutation.from_order(tuple(reversed(p.order)))
            assert heat_score(p, kernel) == pytest.approx(heat_score(reversed_p, kernel))


class TestSelectDefault:
    def test_default_eight_way_order(self):
        chosen = select_default(8)
        assert chosen.order == DEFAULT_ORDER_8WAY
        assert chosen.distance_multiset == (3, 3, 3, 4, 4, 5, 5, 5)
        assert chosen.min_distance == 3

    def test_default_is_full_search_minimum(self):
        kernel = HeatKernel()
        best = min(
            enumerate_valid(8, 3), key=lambda p: (heat_score(p, kernel), p.order)
        )
        assert best.order == DEFAULT_ORDER_8WAY

    def test_null_kernel_tie_breaks_lexicographically(self):
        chosen = select_default(8, _NullKernel())
        assert chosen.order == min(p.order for p in enumerate_valid(8, 3))

    @pytest.mark.parametrize("ways", [2, 4, 5, 6])
    def test_smaller_ways_respect_feasible_floor(self, ways):
        chosen = select_default(ways)
        assert chosen.min_distance == max_feasible_min_distance(ways)


class TestWritePermutation:
    def test_rejects_non_permutations(self):
        with pytest.raises(InvalidArgs):
            WritePermutation.from_order((0, 0, 1))
        with pytest.raises(InvalidArgs):
            WritePermutation.from_order((1, 2, 3))

    @given(st.permutations(list(range(8))))
    @settings(max_examples=100)
    def test_multiset_matches_manual_derivation(self, order):
        p = WritePermutation.from_order(order)
        n = len(order)
        manual = sorted(abs(order[(i + 1) % n] - order[i]) for i in range(n))
        assert list(p.distance_multiset) == manual
        assert sorted(circular_distances(order)) == manual
