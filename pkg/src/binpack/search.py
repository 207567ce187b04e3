"""Backtracking search for the decision problem and the minimizing driver.

Branching follows decreasing best fit: pick the heaviest unassigned item
(ties by index) and try candidate bins by smallest sufficient residual
capacity (ties by index).  After exhausting a trial, the tried bin, and
optionally bins with an identical load state, are removed from the domains
of all unassigned items of the same weight.  Before every choice point two
dominance rules may commit items outright: an item exactly filling a bin's
residual capacity, and the heaviest item fitting a bin that cannot take two
more items.

A node is one committed branching trial; dominance commitments, forced
moves, and propagation events are not nodes.
"""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Callable

from .bounds import DEFAULT_DFF_ORDER, BoundResult, DffKind, l2, lower_bound_seq
from .instances import Instance, reduce_weights
from .parallel import ParallelBoundEngine, default_workers
from .propagator import BoundEngine, propagate
from .store import DomainStore, Wipeout

__all__ = [
    "BoundMode",
    "SearchConfig",
    "SearchStats",
    "SolveStatus",
    "Solution",
    "DecisionResult",
    "MinimizeResult",
    "make_bound_engine",
    "solve_decision",
    "minimize",
]


class BoundMode(enum.Enum):
    L2 = "l2"
    DFFS_SEQ = "dffs-seq"
    DFFS_PAR = "dffs-par"

    @classmethod
    def from_name(cls, name: str) -> "BoundMode":
        for mode in cls:
            if mode.value == name.strip().lower():
                return mode
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown bound mode {name!r} (expected one of {valid})")


@dataclass(frozen=True)
class SearchConfig:
    bound_mode: BoundMode = BoundMode.DFFS_SEQ
    dominance: bool = True
    single_fit_dominance: bool = True
    sym_break_same_size: bool = True
    sym_break_equivalent_bins: bool = True
    time_limit: float = 600.0
    workers: int | None = None
    dff_order: tuple[DffKind, ...] = DEFAULT_DFF_ORDER

    def __post_init__(self) -> None:
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    fails: int = 0
    propagations: int = 0
    bound_calls: int = 0
    solve_time: float = 0.0
    solved: bool = False
    bins: int | None = None


class SolveStatus(enum.Enum):
    SOLUTION = "solution"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timed-out"


@dataclass(frozen=True)
class Solution:
    assignment: tuple[int, ...]  # bin index per item, 0-based
    loads: tuple[int, ...]

    def used_bins(self) -> int:
        return sum(1 for load in self.loads if load > 0)

    def validate(self, inst: Instance) -> None:
        if len(self.assignment) != inst.n:
            raise ValueError("assignment length mismatch")
        sums = [0] * len(self.loads)
        for i, j in enumerate(self.assignment):
            sums[j] += inst.weights[i]
        if tuple(sums) != self.loads:
            raise ValueError("reported loads do not match the assignment")
        if any(load > inst.c for load in self.loads):
            raise ValueError("a bin exceeds the capacity")


@dataclass
class DecisionResult:
    status: SolveStatus
    solution: Solution | None
    stats: SearchStats


@dataclass
class MinimizeResult:
    status: SolveStatus  # SOLUTION (optimum proven) or TIMED_OUT
    bins: int | None
    solution: Solution | None
    per_k: list[tuple[int, SolveStatus, SearchStats]]
    stats: SearchStats


def make_bound_engine(cfg: SearchConfig) -> tuple[BoundEngine, Callable[[], None]]:
    """Engine for the configured mode, plus a cleanup callable."""
    if cfg.bound_mode is BoundMode.L2:
        def engine(red, k):
            value = l2(red)
            return BoundResult(lb=value, exceeded_k=value > k)

        return engine, lambda: None
    if cfg.bound_mode is BoundMode.DFFS_SEQ:
        return (lambda red, k: lower_bound_seq(red, k, cfg.dff_order)), lambda: None
    par = ParallelBoundEngine(
        kinds=cfg.dff_order,
        workers=cfg.workers if cfg.workers is not None else default_workers(),
    )
    return par, par.close


class _Timeout(Exception):
    pass


class _Search:
    def __init__(
        self,
        inst: Instance,
        k: int,
        cfg: SearchConfig,
        engine: BoundEngine,
        deadline: float,
        stats: SearchStats,
    ):
        self.inst = inst
        self.cfg = cfg
        self.engine = engine
        self.deadline = deadline
        self.stats = stats
        self.store = DomainStore.initial(inst, k)

    def run(self) -> tuple[SolveStatus, Solution | None]:
        try:
            if self._propagate().failed:
                return SolveStatus.INFEASIBLE, None
            return self._dfs()
        except _Timeout:
            return SolveStatus.TIMED_OUT, None

    def _propagate(self):
        self.stats.propagations += 1
        outcome = propagate(self.store, self.inst, self.engine)
        self.stats.bound_calls += outcome.bound_calls
        return outcome

    def _check_time(self) -> None:
        if time.monotonic() > self.deadline:
            raise _Timeout

    def _dfs(self) -> tuple[SolveStatus, Solution | None]:
        self._check_time()
        store = self.store
        mark0 = store.mark()
        if not self._apply_dominance():
            store.undo_to(mark0)
            return SolveStatus.INFEASIBLE, None
        if store.all_assigned():
            solution = Solution(
                assignment=store.assignment(), loads=tuple(store.committed_load)
            )
            return SolveStatus.SOLUTION, solution
        item = self._select_item()
        tried = 0
        while True:
            self._check_time()
            if store.is_assigned(item):
                # Symmetry removals left a single bin: a forced move, not a node.
                if self._propagate().failed:
                    store.undo_to(mark0)
                    return SolveStatus.INFEASIBLE, None
                status, solution = self._dfs()
                if status is SolveStatus.INFEASIBLE:
                    store.undo_to(mark0)
                return status, solution
            j = self._select_bin(item, tried)
            if j is None:
                store.undo_to(mark0)
                return SolveStatus.INFEASIBLE, None
            tried |= 1 << j
            self.stats.nodes += 1
            mark1 = store.mark()
            store.commit(item, j)
            if self._propagate().failed:
                self.stats.fails += 1
            else:
                status, solution = self._dfs()
                if status is not SolveStatus.INFEASIBLE:
                    return status, solution
            store.undo_to(mark1)
            if not self._post_backtrack(item, j):
                store.undo_to(mark0)
                return SolveStatus.INFEASIBLE, None

    def _select_item(self) -> int:
        weights = self.store.weights
        return min(self.store.open_items(), key=lambda i: (-weights[i], i))

    def _select_bin(self, i: int, tried: int) -> int | None:
        store = self.store
        w = store.weights[i]
        best: tuple[int, int] | None = None
        for j in store.candidates(i):
            if tried >> j & 1:
                continue
            residual = store.residual(j)
            if residual < w:
                continue
            key = (residual, j)
            if best is None or key < best:
                best = key
        return None if best is None else best[1]

    def _apply_dominance(self) -> bool:
        """Commit forced items until none applies; False on failure."""
        cfg = self.cfg
        if not (cfg.dominance or cfg.single_fit_dominance):
            return True
        while True:
            move = self._find_dominance_move()
            if move is None:
                return True
            item, j = move
            self.store.commit(item, j)
            if self._propagate().failed:
                return False

    def _find_dominance_move(self) -> tuple[int, int] | None:
        store = self.store
        if self.cfg.dominance:
            for j in range(store.k):
                residual = store.residual(j)
                if residual <= 0:
                    continue
                for i in store.open_items_of_bin(j):
                    if store.weights[i] == residual:
                        return i, j
        if self.cfg.single_fit_dominance:
            for j in range(store.k):
                residual = store.residual(j)
                if residual <= 0:
                    continue
                fitting = [
                    i for i in store.open_items_of_bin(j) if store.weights[i] <= residual
                ]
                if not fitting:
                    continue
                if len(fitting) >= 2:
                    ws = sorted(store.weights[i] for i in fitting)
                    if ws[0] + ws[1] <= residual:
                        continue  # two items may still go in together
                heaviest = min(fitting, key=lambda i: (-store.weights[i], i))
                return heaviest, j
        return None

    def _post_backtrack(self, item: int, j: int) -> bool:
        """Domain removals after exhausting the trial (item -> j)."""
        store = self.store
        cfg = self.cfg
        targets = [item]
        if cfg.sym_break_same_size:
            w = store.weights[item]
            targets = [m for m in store.open_items() if store.weights[m] == w]
        bins = [j]
        if cfg.sym_break_equivalent_bins:
            sig = store.bin_signature(j)
            bins += [
                b for b in range(store.k) if b != j and store.bin_signature(b) == sig
            ]
        try:
            for m in targets:
                for b in bins:
                    store.remove_bin(m, b)
        except Wipeout:
            return False
        return True


def solve_decision(
    inst: Instance,
    k: int,
    cfg: SearchConfig,
    deadline: float | None = None,
    engine: BoundEngine | None = None,
) -> DecisionResult:
    """Complete depth-first search for a packing into at most k bins."""
    if k < 1:
        raise ValueError("k must be >= 1")
    stats = SearchStats()
    start = time.monotonic()
    if deadline is None:
        deadline = start + cfg.time_limit
    close = lambda: None
    if engine is None:
        engine, close = make_bound_engine(cfg)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * inst.n + 500))
    try:
        status, solution = _Search(inst, k, cfg, engine, deadline, stats).run()
    finally:
        close()
    stats.solve_time = time.monotonic() - start
    stats.solved = status is not SolveStatus.TIMED_OUT
    stats.bins = k if status is SolveStatus.SOLUTION else None
    return DecisionResult(status=status, solution=solution, stats=stats)


def minimize(inst: Instance, cfg: SearchConfig) -> MinimizeResult:
    """Find the minimum feasible bin count.

    Starts from the root lower bound of the configured engine and raises k
    on each infeasibility, sharing one wall-clock budget across rounds.
    Every round restarts cold.
    """
    start = time.monotonic()
    deadline = start + cfg.time_limit
    engine, close = make_bound_engine(cfg)
    total = SearchStats()
    per_k: list[tuple[int, SolveStatus, SearchStats]] = []
    try:
        root = engine(reduce_weights(inst), inst.n)
        total.bound_calls += 1
        k = max(1, root.lb)
        while k <= inst.n:
            result = solve_decision(inst, k, cfg, deadline=deadline, engine=engine)
            per_k.append((k, result.status, result.stats))
            total.nodes += result.stats.nodes
            total.fails += result.stats.fails
            total.propagations += result.stats.propagations
            total.bound_calls += result.stats.bound_calls
            if result.status is SolveStatus.SOLUTION:
                total.solve_time = time.monotonic() - start
                total.solved = True
                total.bins = k
                return MinimizeResult(
                    status=SolveStatus.SOLUTION,
                    bins=k,
                    solution=result.solution,
                    per_k=per_k,
                    stats=total,
                )
            if result.status is SolveStatus.TIMED_OUT:
                break
            k += 1
    finally:
        close()
    total.solve_time = time.monotonic() - start
    return MinimizeResult(
        status=SolveStatus.TIMED_OUT, bins=None, solution=None, per_k=per_k, stats=total
    )
