"""Filtering for the packing constraint.

One call runs, per bin: load coherence, basic load tightening, and basic
item elimination/commitment; then per bin a packability check, knapsack
load tightening, and knapsack item elimination/commitment; finally the
feasibility check (reduce the partial packing, ask the bound engine, fail
when the bound exceeds the bin count).  The whole sequence iterates until
no domain changes.

Knapsack reasoning is exact: reachable loads are subset sums kept as a
bitset over [0, c].  Any replacement plugged in here must keep the one-way
guarantee that a load reported unreachable is truly unreachable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from .bounds import BoundResult
from .instances import Instance, ReducedInstance, reduce_packing
from .store import DomainStore, Wipeout, _bits as _mask_bits

__all__ = [
    "PropagationStatus",
    "PropagationOutcome",
    "BoundEngine",
    "propagate",
    "load_coherence",
    "basic_load_tightening",
    "basic_item_filter",
    "reachable_sums",
    "bitset_values",
    "packability",
    "knapsack_load_tightening",
    "knapsack_item_filter",
]

BoundEngine = Callable[[ReducedInstance, int], BoundResult]


class PropagationStatus(enum.Enum):
    FIXPOINT = "fixpoint"
    FAILURE = "failure"


@dataclass
class PropagationOutcome:
    status: PropagationStatus
    changed_items: set[int] = field(default_factory=set)
    changed_bins: set[int] = field(default_factory=set)
    iterations: int = 0
    bound_calls: int = 0
    reason: str = ""

    @property
    def failed(self) -> bool:
        return self.status is PropagationStatus.FAILURE


# -- basic filtering ------------------------------------------------------


def load_coherence(store: DomainStore, j: int, total_weight: int) -> bool:
    """Adjust bin j's load interval from the total weight and the other
    bins' intervals."""
    changed = store.set_lo(j, total_weight - (store.total_hi - store.load_hi[j]))
    changed |= store.set_hi(j, total_weight - (store.total_lo - store.load_lo[j]))
    return changed


def basic_load_tightening(store: DomainStore, j: int) -> bool:
    """Clamp bin j's interval to [committed, committed + open candidates]."""
    changed = store.set_lo(j, store.committed_load[j])
    changed |= store.set_hi(j, store.possible_load(j))
    return changed


def basic_item_filter(store: DomainStore, i: int, j: int) -> bool:
    """Eliminate item i from bin j when it cannot fit; commit it when the
    bin cannot reach its minimum load without it."""
    w = store.weights[i]
    eliminate = store.committed_load[j] + w > store.load_hi[j]
    commit = store.possible_load(j) - w < store.load_lo[j]
    if eliminate and commit:
        raise Wipeout(f"item {i} both needed by and too big for bin {j}")
    if eliminate:
        return store.remove_bin(i, j)
    if commit:
        return store.commit(i, j)
    return False


# -- knapsack filtering ----------------------------------------------------


def _add_weights(bits: int, weights: list[int], cap_mask: int) -> int:
    for w in weights:
        bits |= bits << w
        bits &= cap_mask
    return bits


def reachable_sums(store: DomainStore, j: int) -> int:
    """Bitset of loads reachable for bin j: committed load plus any subset
    of its open candidates, truncated at the capacity."""
    cap_mask = (1 << (store.c + 1)) - 1
    ws = [store.weights[i] for i in store.open_items_of_bin(j)]
    return _add_weights(1 << store.committed_load[j], ws, cap_mask)


def bitset_values(bits: int) -> list[int]:
    out = []
    v = 0
    while bits:
        if bits & 1:
            out.append(v)
        bits >>= 1
        v += 1
    return out


def _window(lo: int, hi: int) -> int:
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << lo


def packability(store: DomainStore, j: int) -> bool:
    """Whether some reachable load lies in bin j's interval."""
    reach = reachable_sums(store, j)
    return bool(reach & _window(store.load_lo[j], store.load_hi[j]))


def knapsack_load_tightening(store: DomainStore, j: int) -> bool:
    """Clamp bin j's interval to the reachable loads inside it."""
    reach = reachable_sums(store, j) & _window(store.load_lo[j], store.load_hi[j])
    if reach == 0:
        raise Wipeout(f"bin {j} has no reachable load in its interval")
    changed = store.set_lo(j, (reach & -reach).bit_length() - 1)
    changed |= store.set_hi(j, reach.bit_length() - 1)
    return changed


def _use_avoid(sums_without: int, w: int, lo: int, hi: int) -> tuple[int, int]:
    # Sums in [lo, hi] using the item (shift by its weight) and avoiding it.
    use = sums_without & _window(max(0, lo - w), hi - w) if hi >= w else 0
    avoid = sums_without & _window(lo, hi)
    return use, avoid


def knapsack_item_filter(store: DomainStore, i: int, j: int) -> bool:
    """Eliminate bin j from item i when no reachable load in the interval
    uses the item; commit when none avoids it."""
    cap_mask = (1 << (store.c + 1)) - 1
    ws = [store.weights[t] for t in store.open_items_of_bin(j) if t != i]
    sums_without = _add_weights(1 << store.committed_load[j], ws, cap_mask)
    use, avoid = _use_avoid(
        sums_without, store.weights[i], store.load_lo[j], store.load_hi[j]
    )
    if not use and not avoid:
        raise Wipeout(f"bin {j} unpackable with or without item {i}")
    if not use:
        return store.remove_bin(i, j)
    if not avoid:
        return store.commit(i, j)
    return False


def _exclusion_sums(base: int, weights: list[int], cap_mask: int) -> list[int]:
    # For every position t, the subset sums of all weights except t, seeded
    # with `base`.  Divide and conquer keeps the shift count at m log m.
    m = len(weights)
    out = [0] * m

    def rec(lo: int, hi: int, excl: int) -> None:
        if hi - lo == 1:
            out[lo] = excl
            return
        mid = (lo + hi) // 2
        rec(lo, mid, _add_weights(excl, weights[mid:hi], cap_mask))
        rec(mid, hi, _add_weights(excl, weights[lo:mid], cap_mask))

    if m:
        rec(0, m, base)
    return out


def _knapsack_bin(store: DomainStore, j: int) -> bool:
    """Packability, load tightening, and item filtering for one bin.

    Equivalent to the per-item public functions but shares one reachability
    pass; mid-loop removals leave later items' sums as supersets of the
    truth, which stays sound and is squeezed out by the fixpoint loop.
    """
    cap_mask = (1 << (store.c + 1)) - 1
    items = store.open_items_of_bin(j)
    ws = [store.weights[i] for i in items]
    base = 1 << store.committed_load[j]
    reach = _add_weights(base, ws, cap_mask)
    inter = reach & _window(store.load_lo[j], store.load_hi[j])
    if inter == 0:
        raise Wipeout(f"bin {j} has no reachable load in its interval")
    changed = store.set_lo(j, (inter & -inter).bit_length() - 1)
    changed |= store.set_hi(j, inter.bit_length() - 1)
    lo, hi = store.load_lo[j], store.load_hi[j]
    if lo <= store.committed_load[j]:
        # The committed load itself sits in the window, so every item has a
        # sum avoiding it and (basic filtering granted) one using it: no
        # elimination or commitment can fire at a fixpoint.
        return changed
    excl = _exclusion_sums(base, ws, cap_mask)
    for pos, i in enumerate(items):
        if not store.has_candidate(i, j):
            continue
        use, avoid = _use_avoid(excl[pos], ws[pos], lo, hi)
        if not use and not avoid:
            raise Wipeout(f"bin {j} unpackable with or without item {i}")
        if not use:
            changed |= store.remove_bin(i, j)
        elif not avoid:
            changed |= store.commit(i, j)
    return changed


# -- fixpoint driver -------------------------------------------------------


def propagate(store: DomainStore, inst: Instance, engine: BoundEngine) -> PropagationOutcome:
    """Run the full filtering sequence to a fixpoint or a failure.

    On failure the store keeps its mutations; callers undo to their own
    trail mark.
    """
    outcome = PropagationOutcome(status=PropagationStatus.FIXPOINT)
    total_weight = inst.total_weight
    store.take_touched()
    dirty = set(range(store.k))
    first = True
    try:
        while True:
            outcome.iterations += 1
            for j in range(store.k):
                load_coherence(store, j, total_weight)
                basic_load_tightening(store, j)
            for i in range(store.n):
                mask = store.masks[i]
                if mask.bit_count() == 1:
                    continue
                for j in _mask_bits(mask):
                    if not store.has_candidate(i, j):
                        continue
                    basic_item_filter(store, i, j)
                    if store.is_assigned(i):
                        break
            bins1, items1 = store.take_touched()
            dirty |= bins1
            for j in sorted(dirty):
                _knapsack_bin(store, j)
            bins2, items2 = store.take_touched()
            dirty = set(bins2)
            outcome.changed_bins |= bins1 | bins2
            outcome.changed_items |= items1 | items2
            pass_changed = bool(bins1 or items1 or bins2 or items2)
            if pass_changed or first:
                # Elimination cascades may have force-committed items past a
                # bin's bound mid-pass; the next pass would fail, so fail now
                # rather than reduce an overloaded packing.
                for j in range(store.k):
                    if store.committed_load[j] > store.load_hi[j]:
                        raise Wipeout(f"bin {j} overcommitted")
                red = reduce_packing(inst, store)
                outcome.bound_calls += 1
                if engine(red, store.k).lb > store.k:
                    raise Wipeout(f"lower bound exceeds {store.k} bins")
            first = False
            if not pass_changed:
                return outcome
    except Wipeout as exc:
        bins3, items3 = store.take_touched()
        outcome.changed_bins |= bins3
        outcome.changed_items |= items3
        outcome.status = PropagationStatus.FAILURE
        outcome.reason = str(exc)
        return outcome
