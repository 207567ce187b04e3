import random

import pytest

from binpack import (
    DomainStore,
    Instance,
    PropagationStatus,
    Wipeout,
    propagate,
)
from binpack.bounds import BoundResult
from binpack.oracle import oracle_subset_sums
from binpack.propagator import (
    basic_item_filter,
    basic_load_tightening,
    bitset_values,
    knapsack_item_filter,
    knapsack_load_tightening,
    load_coherence,
    packability,
    reachable_sums,
)
from binpack.search import SearchConfig, make_bound_engine
from conftest import enumerate_packings, random_instance

ENGINE, _ = make_bound_engine(SearchConfig())


def snapshot(store: DomainStore):
    return (list(store.masks), list(store.load_lo), list(store.load_hi))


class TestStore:
    def test_initial_state(self):
        inst = Instance(10, (4, 3, 2))
        store = DomainStore.initial(inst, 2)
        assert store.masks == [0b11] * 3
        assert store.load_lo == [0, 0]
        assert store.load_hi == [10, 10]
        assert store.committed_load == [0, 0]
        assert store.cand_sum == [9, 9]

    def test_commit_updates_sums(self):
        inst = Instance(10, (4, 3, 2))
        store = DomainStore.initial(inst, 2)
        store.commit(0, 1)
        assert store.committed_load == [0, 4]
        assert store.cand_sum == [5, 5]
        assert store.is_assigned(0) and store.assigned_bin(0) == 1

    def test_remove_auto_commits_last_bin(self):
        inst = Instance(10, (4, 3, 2))
        store = DomainStore.initial(inst, 2)
        store.remove_bin(0, 0)
        assert store.is_assigned(0)
        assert store.committed_load == [0, 4]

    def test_wipeout_on_last_bin(self):
        inst = Instance(10, (4,))
        store = DomainStore.initial(inst, 1)
        with pytest.raises(Wipeout):
            store.remove_bin(0, 0)

    def test_trail_round_trip(self):
        rng = random.Random(77)
        inst = Instance(20, (7, 6, 5, 4, 3))
        store = DomainStore.initial(inst, 3)
        base = snapshot(store)
        sums = (list(store.committed_load), list(store.cand_sum),
                store.total_lo, store.total_hi)
        mark = store.mark()
        store.commit(0, 1)
        store.remove_bin(1, 2)
        store.set_lo(0, 3)
        store.set_hi(2, 15)
        store.remove_bin(1, 0)  # auto-commits item 1 to bin 1
        assert snapshot(store) != base
        store.undo_to(mark)
        assert snapshot(store) == base
        assert (list(store.committed_load), list(store.cand_sum),
                store.total_lo, store.total_hi) == sums

    def test_k_one_commits_everything(self):
        inst = Instance(10, (4, 3))
        store = DomainStore.initial(inst, 1)
        assert store.all_assigned()
        assert store.committed_load == [7]


class TestBasicFilters:
    def test_load_coherence_example(self):
        # total 16, other bin at most 10: this bin carries at least 6
        inst = Instance(10, (6, 5, 5))
        store = DomainStore.initial(inst, 2)
        assert load_coherence(store, 0, 16)
        assert store.load_lo[0] == 6

    def test_basic_tightening_uses_committed_and_possible(self):
        inst = Instance(10, (6, 2))
        store = DomainStore.initial(inst, 2)
        store.commit(0, 0)
        assert basic_load_tightening(store, 0)
        assert store.load_lo[0] == 6
        assert store.load_hi[0] == 8

    def test_item_eliminated_when_too_big(self):
        inst = Instance(10, (6, 5))
        store = DomainStore.initial(inst, 2)
        store.commit(0, 0)
        store.set_hi(0, 10)
        assert basic_item_filter(store, 1, 0)  # 6 + 5 > 10
        assert not store.has_candidate(1, 0)

    def test_item_committed_when_needed(self):
        inst = Instance(10, (6, 5))
        store = DomainStore.initial(inst, 2)
        store.set_lo(0, 10)
        # possible 11 - 6 = 5 < 10: bin 0 cannot reach 10 without item 0
        assert basic_item_filter(store, 0, 0)
        assert store.assigned_bin(0) == 0

    def test_tie_between_signals_fails(self):
        # item 0 is both too heavy for bin 0 (5 + 6 > 10) and required to
        # reach its minimum load (11 - 6 = 5 < 10): the domain would empty
        inst = Instance(10, (6, 5))
        store = DomainStore.initial(inst, 2)
        store.commit(1, 0)
        store.set_lo(0, 10)
        with pytest.raises(Wipeout):
            basic_item_filter(store, 0, 0)


class TestKnapsack:
    def build(self, c, weights, k=2):
        inst = Instance(c, weights)
        return inst, DomainStore.initial(inst, k)

    def test_reachable_sums_matches_oracle(self):
        rng = random.Random(50)
        for _ in range(200):
            c = rng.randint(1, 60)
            n = rng.randint(0, 12)
            ws = tuple(rng.randint(1, c) for _ in range(n))
            if not ws:
                continue
            inst = Instance(c, ws)
            store = DomainStore.initial(inst, 2)
            # commit a few items to bin 0 to vary the base load
            committed = 0
            for i in range(n):
                if rng.random() < 0.3 and committed + ws[i] <= c:
                    store.commit(i, 0)
                    committed += ws[i]
            cands = [store.weights[i] for i in store.open_items_of_bin(0)]
            expected = {
                committed + s
                for s in oracle_subset_sums(cands, c - committed)
            }
            got = set(bitset_values(reachable_sums(store, 0)))
            assert got == expected

    def test_packability(self):
        inst, store = self.build(10, (6, 5))
        store.set_lo(0, 4)
        store.set_hi(0, 4)
        assert not packability(store, 0)  # only 0, 5, 6 reachable (11 > c)
        store2 = DomainStore.initial(inst, 2)
        store2.set_lo(0, 5)
        store2.set_hi(0, 6)
        assert packability(store2, 0)

    def test_knapsack_tightening(self):
        inst, store = self.build(10, (6, 5))
        store.set_lo(0, 1)
        store.set_hi(0, 9)
        assert knapsack_load_tightening(store, 0)
        assert (store.load_lo[0], store.load_hi[0]) == (5, 6)

    def test_knapsack_commit(self):
        # bin 0 must reach at least 6; without item 0 only 0 or 5 reachable
        inst, store = self.build(10, (6, 5))
        store.set_lo(0, 6)
        assert knapsack_item_filter(store, 0, 0)
        assert store.assigned_bin(0) == 0

    def test_knapsack_eliminate(self):
        # loads are pinned to 5: item 0 (weight 6) can never be in bin 0
        inst, store = self.build(10, (6, 5))
        store.set_lo(0, 5)
        store.set_hi(0, 5)
        assert knapsack_item_filter(store, 0, 0)
        assert not store.has_candidate(0, 0)

    def test_bitset_values(self):
        assert bitset_values(0b1011) == [0, 1, 3]


class TestPropagate:
    def test_load_coherence_fixpoint_example(self):
        inst = Instance(10, (6, 5, 5))
        store = DomainStore.initial(inst, 2)
        out = propagate(store, inst, ENGINE)
        assert out.status is PropagationStatus.FIXPOINT
        assert store.load_lo == [6, 6]
        assert store.load_hi == [10, 10]

    def test_single_bin_overload_fails(self):
        inst = Instance(10, (6, 6, 6))
        store = DomainStore.initial(inst, 1)
        out = propagate(store, inst, ENGINE)
        assert out.failed

    def test_bound_failure(self):
        # loads fit individually, but the lower bound needs 3 > k = 2 bins
        inst = Instance(10, (6, 6, 6))
        store = DomainStore.initial(inst, 2)
        out = propagate(store, inst, ENGINE)
        assert out.failed

    def test_idempotent_at_solution(self):
        inst = Instance(9, (4, 4, 3, 3, 2, 2))
        store = DomainStore.initial(inst, 2)
        for i, j in enumerate((0, 1, 0, 1, 0, 1)):
            store.commit(i, j)
        out = propagate(store, inst, ENGINE)
        assert not out.failed
        first = snapshot(store)
        out2 = propagate(store, inst, ENGINE)
        assert not out2.failed
        assert snapshot(store) == first
        assert not out2.changed_items and not out2.changed_bins

    def test_monotone_and_idempotent(self):
        rng = random.Random(60)
        for _ in range(120):
            inst = random_instance(rng, max_n=8, max_c=30)
            k = rng.randint(1, 3)
            store = DomainStore.initial(inst, k)
            before = snapshot(store)
            out = propagate(store, inst, ENGINE)
            if out.failed:
                continue
            after = snapshot(store)
            for m_new, m_old in zip(after[0], before[0]):
                assert m_new & ~m_old == 0  # domains only shrink
            for lo_new, lo_old in zip(after[1], before[1]):
                assert lo_new >= lo_old
            for hi_new, hi_old in zip(after[2], before[2]):
                assert hi_new <= hi_old
            propagate(store, inst, ENGINE)
            assert snapshot(store) == after  # fixpoint is stable

    def test_soundness_no_solution_pruned(self):
        rng = random.Random(61)
        checked = 0
        for _ in range(150):
            inst = random_instance(rng, max_n=7, max_c=25)
            k = rng.randint(1, 3)
            store = DomainStore.initial(inst, k)
            # random partial state
            for i in range(inst.n):
                if rng.random() < 0.25:
                    j = rng.randrange(k)
                    if store.has_candidate(i, j) and not store.is_assigned(i):
                        try:
                            store.remove_bin(i, j)
                        except Wipeout:
                            break
            masks_before = list(store.masks)
            solutions = enumerate_packings(inst, masks_before, k)
            out = propagate(store, inst, ENGINE)
            if out.failed:
                assert solutions == [], f"{inst} k={k} lost all of {solutions[:3]}"
                continue
            for sol in solutions:
                for i, j in enumerate(sol):
                    assert store.has_candidate(i, j)
            checked += 1
        assert checked > 30

    def test_checking_at_full_assignment(self):
        rng = random.Random(62)
        for _ in range(60):
            inst = random_instance(rng, max_n=7, max_c=25)
            k = rng.randint(1, 3)
            store = DomainStore.initial(inst, k)
            assign = [rng.randrange(k) for _ in range(inst.n)]
            try:
                for i, j in enumerate(assign):
                    store.commit(i, j)
            except Wipeout:
                continue
            out = propagate(store, inst, ENGINE)
            loads = [0] * k
            for i, j in enumerate(assign):
                loads[j] += inst.weights[i]
            if any(load > inst.c for load in loads):
                assert out.failed
            else:
                assert not out.failed
                assert store.committed_load == loads

    def test_failure_leaves_trail_untouched_for_caller(self):
        inst = Instance(10, (6, 6, 6))
        store = DomainStore.initial(inst, 2)
        mark = store.mark()
        before = snapshot(store)
        out = propagate(store, inst, ENGINE)
        assert out.failed
        store.undo_to(mark)
        assert snapshot(store) == before
