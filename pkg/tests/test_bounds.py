import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binpack import DffKind, ReducedInstance, dff_value, l1, l2, lambda_range
from binpack.bounds import (
    DEFAULT_DFF_ORDER,
    VB2_ACCUMULATOR_MAX,
    dff_bound,
    dff_bound_batch,
    l2_partition,
    l2_value,
    lower_bound_seq,
)
from binpack.oracle import oracle_optimum
from conftest import random_instance, random_reduced


class TestL1:
    def test_fig1(self):
        assert l1(ReducedInstance(9, (4, 4, 3, 3, 2, 2))) == 2

    def test_empty(self):
        assert l1(ReducedInstance(9, ())) == 0

    def test_ceil(self):
        assert l1(ReducedInstance(10, (6, 6, 6))) == 2


class TestL2:
    def test_three_sixes(self):
        assert l2(ReducedInstance(10, (6, 6, 6))) == 3

    def test_mixed(self):
        assert l2(ReducedInstance(10, (6, 6, 4, 4, 2))) == 3

    def test_single_full_item(self):
        assert l2(ReducedInstance(7, (7,))) == 1

    def test_partition_membership(self):
        red = ReducedInstance(10, (9, 6, 5, 4, 2, 1))
        p = l2_partition(red, 2)
        assert sorted(p.w1) == [9]          # c - 2 = 8 < w
        assert sorted(p.w2) == [6]          # 5 < w <= 8
        assert sorted(p.w3) == [2, 4, 5]    # 2 <= w <= 5
        assert p.lam == 2

    def test_value_formula(self):
        red = ReducedInstance(10, (6, 6, 4, 4, 2))
        # lambda=0: big items 6,6 get a bin each with slack 8; 4+4+2 overflow
        assert l2_value(red, 0) == 2 + 1

    def test_restricted_equals_full_sweep(self):
        rng = random.Random(21)
        for _ in range(200):
            red = random_reduced(rng, max_r=12, max_c=60)
            assert l2(red) == l2(red, full_sweep=True)

    def test_equals_mt_sweep(self):
        rng = random.Random(22)
        for _ in range(200):
            red = random_reduced(rng, max_r=12, max_c=60)
            if red.r == 0:
                continue
            mt_best = max(
                dff_bound(DffKind.MT, red, lam)
                for lam in lambda_range(DffKind.MT, red.c)
            )
            assert l2(red) == mt_best

    def test_odd_capacity_midpoint_items(self):
        # five items above c/2 pairwise conflict; the sweep must see it
        red = ReducedInstance(23, (12, 4, 19, 8, 12, 14, 12))
        assert l2(red) == 5
        mt_best = max(
            dff_bound(DffKind.MT, red, lam) for lam in lambda_range(DffKind.MT, red.c)
        )
        assert mt_best == 5


class TestDffValues:
    @pytest.mark.parametrize(
        "w,expected", [(140, 150), (75, 75), (20, 0)]
    )
    def test_mt(self, w, expected):
        assert dff_value(DffKind.MT, w, 150, 30) == expected

    @pytest.mark.parametrize("w,expected", [(6, 4), (5, 3), (4, 2)])
    def test_ccm1(self, w, expected):
        assert dff_value(DffKind.CCM1, w, 10, 3) == expected

    def test_bj1(self):
        # 7 mod 4 = 3 > 10 mod 4 = 2: 1*(4-2) + 3 - 2
        assert dff_value(DffKind.BJ1, 7, 10, 4) == 3

    @pytest.mark.parametrize("w,expected", [(5, 15), (4, 10)])
    def test_fs1(self, w, expected):
        assert dff_value(DffKind.FS1, w, 10, 3) == expected

    @pytest.mark.parametrize("w,expected", [(6, 2), (4, 0)])
    def test_vb2(self, w, expected):
        assert dff_value(DffKind.VB2, w, 10, 2) == expected

    @pytest.mark.parametrize("kind", list(DffKind))
    def test_zero_maps_to_zero(self, kind):
        for c in (1, 7, 10, 33):
            rng = lambda_range(kind, c)
            for lam in rng:
                assert dff_value(kind, 0, c, lam) == 0

    def test_rad2_recursive_branch_lands_in_base_case(self):
        # upper-branch arguments c - w stay at most c - 2*lam, so one level
        # of recursion always suffices
        for c in range(1, 120):
            rng = lambda_range(DffKind.RAD2, c)
            for lam in rng:
                for w in range(2 * lam, c + 1):
                    assert c - w <= c - 2 * lam


class TestLambdaRange:
    def test_rad2_examples(self):
        assert lambda_range(DffKind.RAD2, 150) == lambda_range(DffKind.RAD2, 150)
        r150 = lambda_range(DffKind.RAD2, 150)
        assert (r150.lo, r150.hi) == (38, 50)
        r7 = lambda_range(DffKind.RAD2, 7)
        assert (r7.lo, r7.hi) == (2, 2) and not r7.is_empty
        r4 = lambda_range(DffKind.RAD2, 4)
        assert r4.is_empty

    def test_mt_c1(self):
        rng = lambda_range(DffKind.MT, 1)
        assert (rng.lo, rng.hi) == (0, 0)

    def test_fs1_fixed(self):
        rng = lambda_range(DffKind.FS1, 10**6)
        assert (rng.lo, rng.hi) == (1, 100)

    @pytest.mark.parametrize("kind", list(DffKind))
    def test_matches_domain_predicate(self, kind):
        # the swept interval must be exactly the integers satisfying the
        # definition's parameter condition (VB2 aside, whose upper end is
        # additionally capped)
        def valid(c, lam):
            if kind is DffKind.MT:
                # includes the odd-capacity midpoint ceil(c/2)
                return 0 <= lam and (2 * lam <= c or (2 * lam == c + 1 and c > 1))
            if kind is DffKind.RAD2:
                return 4 * lam > c and 3 * lam <= c
            if kind is DffKind.FS1:
                return 1 <= lam <= 100
            if kind is DffKind.CCM1:
                return 1 <= lam and 2 * lam <= c
            if kind is DffKind.VB2:
                return 2 <= lam <= c
            return 1 <= lam <= c

        for c in range(1, 130):
            rng = lambda_range(kind, c)
            expected = [lam for lam in range(0, max(c, 100) + 1) if valid(c, lam)]
            assert list(rng) == expected, (kind, c)

    def test_vb2_cap_binds_for_huge_weights(self):
        c = 10**13
        red = ReducedInstance(c, (c - 1, c - 2, c // 2) + (10**12,) * 7)
        rng = lambda_range(DffKind.VB2, c, red)
        cap = VB2_ACCUMULATOR_MAX // (red.r * red.max_weight)
        assert rng.hi == cap < c
        assert rng.lo == 2

    def test_vb2_uncapped_when_no_reduction_given(self):
        assert lambda_range(DffKind.VB2, 100).hi == 100


class TestDffBound:
    def test_mt_lambda_zero_is_l1(self):
        rng = random.Random(9)
        for _ in range(50):
            red = random_reduced(rng)
            assert dff_bound(DffKind.MT, red, 0) == l1(red)

    def test_mt_three_sixes(self):
        red = ReducedInstance(10, (6, 6, 6))
        assert dff_bound(DffKind.MT, red, 4) == 2
        assert dff_bound(DffKind.MT, red, 5) == 3

    def test_fs1_two_fives(self):
        assert dff_bound(DffKind.FS1, ReducedInstance(10, (5, 5)), 3) == 1

    def test_batch_equals_scalar(self):
        rng = random.Random(10)
        for _ in range(150):
            red = random_reduced(rng, max_r=10, max_c=120)
            for kind in DffKind:
                span = lambda_range(kind, red.c, red)
                if span.is_empty:
                    continue
                values = dff_bound_batch(kind, red, span.lo, span.hi)
                assert len(values) == len(span)
                for idx, lam in enumerate(span):
                    assert int(values[idx]) == dff_bound(kind, red, lam), (kind, red, lam)

    def test_transformed_capacity_positive_on_grid(self):
        rng = random.Random(12)
        for _ in range(100):
            red = random_reduced(rng, max_c=150)
            for kind in DffKind:
                for lam in lambda_range(kind, red.c, red):
                    assert dff_value(kind, red.c, red.c, lam) > 0


@st.composite
def feasible_multisets(draw):
    c = draw(st.integers(min_value=1, max_value=400))
    items = []
    budget = c
    for _ in range(draw(st.integers(min_value=0, max_value=8))):
        if budget <= 0:
            break
        w = draw(st.integers(min_value=1, max_value=budget))
        items.append(w)
        budget -= w
    return c, items


class TestDualFeasibility:
    @pytest.mark.parametrize("kind", list(DffKind))
    @given(data=st.data())
    @settings(max_examples=300, deadline=None)
    def test_transformed_sums_bounded(self, kind, data):
        c, items = data.draw(feasible_multisets())
        span = lambda_range(kind, c)
        if span.is_empty:
            return
        lam = data.draw(st.integers(min_value=span.lo, max_value=span.hi))
        total = sum(dff_value(kind, w, c, lam) for w in items)
        assert total <= dff_value(kind, c, c, lam)


class TestLowerBoundSeq:
    def test_early_exit(self):
        red = ReducedInstance(10, (6, 6, 6))
        res = lower_bound_seq(red, 1)
        assert res.exceeded_k
        assert res.lb >= 2
        # stops after the first kind
        assert list(res.per_dff) == [DffKind.MT]

    def test_empty_reduction(self):
        res = lower_bound_seq(ReducedInstance(10, ()), 0)
        assert res.lb == 0
        assert not res.exceeded_k

    def test_full_sweep(self):
        res = lower_bound_seq(ReducedInstance(10, (6, 6, 6)), 3)
        assert res.lb == 3
        assert not res.exceeded_k
        assert res.per_dff[DffKind.MT] == 3
        assert set(res.per_dff) == set(DEFAULT_DFF_ORDER)

    def test_respects_kind_order(self):
        red = ReducedInstance(10, (6, 6, 6))
        res = lower_bound_seq(red, 1, kinds=(DffKind.CCM1, DffKind.MT))
        assert list(res.per_dff) == [DffKind.CCM1]

    def test_eval_count_matches_ranges(self):
        red = ReducedInstance(30, (11, 9, 20))
        res = lower_bound_seq(red, 10**9)
        expected = sum(len(lambda_range(k, red.c, red)) for k in DEFAULT_DFF_ORDER)
        assert res.evals == expected


class TestValidity:
    def test_bounds_never_exceed_optimum(self):
        rng = random.Random(30)
        for _ in range(150):
            inst = random_instance(rng, max_n=8, max_c=40)
            opt = oracle_optimum(inst).optimum
            red = ReducedInstance(inst.c, inst.weights)
            assert l1(red) <= opt
            assert l2(red) <= opt
            assert lower_bound_seq(red, inst.n + 1).lb <= opt
