"""Brute-force references for verifying bounds, filtering, and search.

Everything here trades speed for independence: exhaustive enumeration,
Python's unbounded integers, and formula transcriptions kept separate from
the engine implementations they validate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

from .bounds import DffKind
from .instances import Instance, ReducedInstance

__all__ = [
    "OracleResult",
    "oracle_optimum",
    "oracle_subset_sums",
    "oracle_lb_grid",
    "oracle_lb_values",
]

MAX_ORACLE_ITEMS = 14


@dataclass(frozen=True)
class OracleResult:
    optimum: int
    witness: tuple[int, ...]  # bin index per item, 0-based


def oracle_optimum(inst: Instance) -> OracleResult:
    """Exact minimum bin count by exhaustive assignment enumeration.

    Bins are opened in canonical order (an item may open bin m only when
    bins 0..m-1 are open), which enumerates set partitions rather than
    labeled assignments.  Refuses more than 14 items.
    """
    n = inst.n
    if n > MAX_ORACLE_ITEMS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_ITEMS} items, got {n}")
    order = sorted(range(n), key=lambda i: (-inst.weights[i], i))
    weights = [inst.weights[i] for i in order]
    best_count = n + 1
    best_assign: list[int] = []
    loads: list[int] = []
    assign = [0] * n

    def place(idx: int) -> None:
        nonlocal best_count, best_assign
        if len(loads) >= best_count:
            return
        if idx == n:
            best_count = len(loads)
            best_assign = assign.copy()
            return
        w = weights[idx]
        for j in range(len(loads)):
            if loads[j] + w <= inst.c:
                loads[j] += w
                assign[idx] = j
                place(idx + 1)
                loads[j] -= w
        loads.append(w)
        assign[idx] = len(loads) - 1
        place(idx + 1)
        loads.pop()

    place(0)
    witness = [0] * n
    for pos, i in enumerate(order):
        witness[i] = best_assign[pos]
    return OracleResult(optimum=best_count, witness=tuple(witness))


def oracle_subset_sums(weights: list[int], cap: int) -> set[int]:
    """All subset sums not exceeding cap, by explicit subset enumeration."""
    if len(weights) > 20:
        raise ValueError("subset-sum oracle limited to 20 weights")
    sums = {0}
    for size in range(1, len(weights) + 1):
        for combo in combinations(weights, size):
            s = sum(combo)
            if s <= cap:
                sums.add(s)
    return sums


def _transform(kind: DffKind, w: int, c: int, lam: int) -> int:
    # Independent transcription of the piecewise weight transformations;
    # deliberately not shared with the engine in bounds.py.
    if kind is DffKind.MT:
        if c - lam < w:
            return c
        if w < lam:
            return 0
        return w
    if kind is DffKind.RAD2:
        if w < lam:
            return 0
        if w <= c - 2 * lam:
            return c // 3
        if w < 2 * lam:
            return c // 2
        return c - _transform(kind, c - w, c, lam)
    if kind is DffKind.FS1:
        num = w * (lam + 1)
        if num % c == 0:
            return w * lam
        return (num // c) * c
    if kind is DffKind.CCM1:
        if 2 * w > c:
            return 2 * (c // lam - (c - w) // lam)
        if 2 * w == c:
            return c // lam
        return 2 * (w // lam)
    if kind is DffKind.VB2:
        def piece(v: int) -> int:
            q, rem = divmod(v * lam, c)
            ceil_v = q + (1 if rem else 0)
            return max(0, ceil_v - 1)

        if 2 * w > c:
            return 2 * piece(c) - 2 * piece(c - w)
        if 2 * w == c:
            return piece(c)
        return 2 * piece(w)
    if kind is DffKind.BJ1:
        base = (w // lam) * (lam - c % lam)
        if w % lam <= c % lam:
            return base
        return base + w % lam - c % lam
    raise ValueError(f"unknown kind {kind!r}")


def _lambda_valid(kind: DffKind, c: int, lam: int) -> bool:
    # Domain conditions straight from the function definitions; the first
    # family also sweeps the odd-capacity midpoint ceil(c/2), whose
    # transformation of integer weights equals the real threshold c/2.
    if kind is DffKind.MT:
        return 0 <= lam and (2 * lam <= c or (lam * 2 == c + 1 and c > 1))
    if kind is DffKind.RAD2:
        return 4 * lam > c and 3 * lam <= c
    if kind is DffKind.FS1:
        return 1 <= lam <= 100
    if kind is DffKind.CCM1:
        return 1 <= lam and 2 * lam <= c
    if kind is DffKind.VB2:
        return 2 <= lam <= c
    if kind is DffKind.BJ1:
        return 1 <= lam <= c
    raise ValueError(f"unknown kind {kind!r}")


def oracle_lb_values(kind: DffKind, red: ReducedInstance) -> Iterator[tuple[int, int]]:
    """Per-parameter bounds over the full valid parameter grid.

    Yields (lambda, bound) with the bound computed as the ceiling of the
    transformed-weight sum over the transformed capacity, all in unbounded
    integer arithmetic.
    """
    c = red.c
    for lam in range(0, max(c, 100) + 1):
        if not _lambda_valid(kind, c, lam):
            continue
        fc = _transform(kind, c, c, lam)
        if fc <= 0:
            continue
        total = 0
        for w in red.weights:
            total += _transform(kind, w, c, lam)
        yield lam, -(-total // fc)


def oracle_lb_grid(kind: DffKind, red: ReducedInstance) -> int:
    """Best bound over the full parameter grid (naive double loop)."""
    best = 0
    for _, lb in oracle_lb_values(kind, red):
        if lb > best:
            best = lb
    return best
