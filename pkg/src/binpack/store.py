"""Trailed domain state for the packing constraint.

Per item a bitmask of candidate bins, per bin an inclusive load interval.
All mutations shrink domains and are recorded on a trail, so search can
mark and undo in O(changes).  Committed loads and open-candidate weight
sums are maintained incrementally.
"""

from __future__ import annotations

from typing import Iterator

from .instances import Instance

__all__ = ["Wipeout", "DomainStore"]


class Wipeout(Exception):
    """A domain emptied or a load interval inverted."""


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class DomainStore:
    """Candidate-bin sets and load intervals for k bins of capacity c."""

    def __init__(self, weights: tuple[int, ...], c: int, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.weights = tuple(weights)
        self.c = c
        self.k = k
        self.n = len(self.weights)
        full = (1 << k) - 1
        self.masks = [full] * self.n
        self.load_lo = [0] * k
        self.load_hi = [c] * k
        self.committed_load = [0] * k
        self.cand_sum = [0] * k
        self.total_lo = 0
        self.total_hi = c * k
        self.trail: list[tuple] = []
        self.touched_bins: set[int] = set()
        self.touched_items: set[int] = set()
        if k == 1:
            for i, w in enumerate(self.weights):
                self.committed_load[0] += w
        else:
            for j in range(k):
                self.cand_sum[j] = sum(self.weights)

    @classmethod
    def initial(cls, inst: Instance, k: int) -> "DomainStore":
        return cls(inst.weights, inst.c, k)

    # -- queries ---------------------------------------------------------

    def is_assigned(self, i: int) -> bool:
        return self.masks[i].bit_count() == 1

    def assigned_bin(self, i: int) -> int:
        mask = self.masks[i]
        if mask.bit_count() != 1:
            raise ValueError(f"item {i} is not assigned")
        return mask.bit_length() - 1

    def candidates(self, i: int) -> Iterator[int]:
        return _bits(self.masks[i])

    def has_candidate(self, i: int, j: int) -> bool:
        return bool(self.masks[i] >> j & 1)

    def open_items(self) -> Iterator[int]:
        for i in range(self.n):
            if self.masks[i].bit_count() > 1:
                yield i

    def open_items_of_bin(self, j: int) -> list[int]:
        bit = 1 << j
        return [
            i
            for i in range(self.n)
            if self.masks[i] & bit and self.masks[i].bit_count() > 1
        ]

    def possible_load(self, j: int) -> int:
        return self.committed_load[j] + self.cand_sum[j]

    def residual(self, j: int) -> int:
        return self.load_hi[j] - self.committed_load[j]

    def bin_signature(self, j: int) -> tuple[int, int, int]:
        return (self.committed_load[j], self.load_lo[j], self.load_hi[j])

    def all_assigned(self) -> bool:
        return all(m.bit_count() == 1 for m in self.masks)

    def assignment(self) -> tuple[int, ...]:
        return tuple(self.assigned_bin(i) for i in range(self.n))

    # -- mutations (trailed) ---------------------------------------------

    def _apply_mask(self, i: int, new_mask: int) -> None:
        old = self.masks[i]
        if new_mask == 0:
            raise Wipeout(f"item {i} has no candidate bin left")
        self.trail.append(("m", i, old))
        self.masks[i] = new_mask
        w = self.weights[i]
        for b in _bits(old & ~new_mask):
            self.cand_sum[b] -= w
            self.touched_bins.add(b)
        if new_mask.bit_count() == 1 and old.bit_count() > 1:
            b = new_mask.bit_length() - 1
            self.cand_sum[b] -= w
            self.committed_load[b] += w
            self.touched_bins.add(b)
        self.touched_items.add(i)

    def remove_bin(self, i: int, j: int) -> bool:
        """Drop bin j from item i's candidates; no-op when absent."""
        mask = self.masks[i]
        bit = 1 << j
        if not mask & bit:
            return False
        if mask == bit:
            raise Wipeout(f"item {i} lost its last bin {j}")
        self._apply_mask(i, mask & ~bit)
        return True

    def commit(self, i: int, j: int) -> bool:
        """Fix item i to bin j (which must be a candidate)."""
        mask = self.masks[i]
        bit = 1 << j
        if not mask & bit:
            raise Wipeout(f"bin {j} is not a candidate of item {i}")
        if mask == bit:
            return False
        self._apply_mask(i, bit)
        return True

    def set_lo(self, j: int, value: int) -> bool:
        if value <= self.load_lo[j]:
            return False
        if value > self.load_hi[j]:
            raise Wipeout(f"bin {j}: load lower bound {value} above upper {self.load_hi[j]}")
        self.trail.append(("l", j, self.load_lo[j]))
        self.total_lo += value - self.load_lo[j]
        self.load_lo[j] = value
        self.touched_bins.add(j)
        return True

    def set_hi(self, j: int, value: int) -> bool:
        if value >= self.load_hi[j]:
            return False
        if value < self.load_lo[j]:
            raise Wipeout(f"bin {j}: load upper bound {value} below lower {self.load_lo[j]}")
        self.trail.append(("h", j, self.load_hi[j]))
        self.total_hi += value - self.load_hi[j]
        self.load_hi[j] = value
        self.touched_bins.add(j)
        return True

    # -- trail -------------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            kind, idx, old = self.trail.pop()
            if kind == "m":
                new = self.masks[idx]
                w = self.weights[idx]
                if new.bit_count() == 1 and old.bit_count() > 1:
                    b = new.bit_length() - 1
                    self.cand_sum[b] += w
                    self.committed_load[b] -= w
                for b in _bits(old & ~new):
                    self.cand_sum[b] += w
                self.masks[idx] = old
            elif kind == "l":
                self.total_lo += old - self.load_lo[idx]
                self.load_lo[idx] = old
            else:
                self.total_hi += old - self.load_hi[idx]
                self.load_hi[idx] = old

    def take_touched(self) -> tuple[set[int], set[int]]:
        """Bins and items touched since the previous call."""
        bins, items = self.touched_bins, self.touched_items
        self.touched_bins = set()
        self.touched_items = set()
        return bins, items
