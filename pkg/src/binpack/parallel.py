"""Worker-parallel lower-bound engine.

The parameter grid of every transformation is split into fixed-size chunks
dispatched over a bounded thread pool; chunk maxima fold into a shared
running maximum.  Once the shared maximum exceeds the bin budget, chunks
not yet started skip their work (cooperative cancellation).  The feasibility
decision (bound > k) is deterministic regardless of worker count or
scheduling, and when the final bound stays within budget the value equals
the sequential engine's exactly.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Sequence

from .bounds import (
    DEFAULT_DFF_ORDER,
    BoundResult,
    DffKind,
    LambdaRange,
    dff_bound_batch,
    lambda_range,
)
from .instances import ReducedInstance

__all__ = ["SharedMax", "BoundTask", "lower_bound_par", "ParallelBoundEngine", "default_workers"]

#: Cancellation is checked once per chunk of this many grid points.
CHUNK = 64


def default_workers() -> int:
    return os.cpu_count() or 1


class SharedMax:
    """Thread-safe non-decreasing maximum (compare-and-maximize)."""

    def __init__(self, value: int = 0):
        self._value = value
        self._lock = threading.Lock()

    def offer(self, value: int) -> int:
        with self._lock:
            if value > self._value:
                self._value = value
            return self._value

    def get(self) -> int:
        with self._lock:
            return self._value


@dataclass(frozen=True)
class BoundTask:
    """One dispatch unit: a transformation with a non-empty parameter range."""

    kind: DffKind
    rng: LambdaRange
    red: ReducedInstance
    k: int


def _run_chunk(
    task: BoundTask,
    lo: int,
    hi: int,
    shared: SharedMax,
    cancellation: bool,
) -> tuple[DffKind, int, int, bool]:
    # Returns (kind, chunk max, points evaluated, skipped).
    if cancellation and shared.get() > task.k:
        return task.kind, 0, 0, True
    values = dff_bound_batch(task.kind, task.red, lo, hi)
    best = int(values.max()) if len(values) else 0
    shared.offer(best)
    return task.kind, best, len(values), False


def _dispatch(
    executor: ThreadPoolExecutor,
    red: ReducedInstance,
    k: int,
    kinds: Sequence[DffKind],
    cancellation: bool,
) -> BoundResult:
    shared = SharedMax(0)
    futures = []
    for kind in kinds:
        rng = lambda_range(kind, red.c, red)
        if rng.is_empty:
            continue
        task = BoundTask(kind=kind, rng=rng, red=red, k=k)
        lo = rng.lo
        while lo <= rng.hi:
            hi = min(lo + CHUNK - 1, rng.hi)
            futures.append(executor.submit(_run_chunk, task, lo, hi, shared, cancellation))
            lo = hi + 1
    wait(futures)

    result = BoundResult(lb=0)
    partial: dict[DffKind, int] = {}
    for fut in futures:
        kind, best, evals, skipped = fut.result()
        result.evals += evals
        if not skipped:
            partial[kind] = max(partial.get(kind, 0), best)
    for kind, best in partial.items():
        result.per_dff[kind] = best
        if best > result.lb:
            result.lb = best
    # per_dff entries for cancelled kinds are partial maxima; they are still
    # valid bounds, and they are complete whenever the budget was not exceeded.
    result.exceeded_k = result.lb > k
    return result


def lower_bound_par(
    red: ReducedInstance,
    k: int,
    kinds: Sequence[DffKind] = DEFAULT_DFF_ORDER,
    workers: int = 1,
    cancellation: bool = True,
) -> BoundResult:
    """Parallel counterpart of the sequential sweep.

    ``cancellation=False`` forces every grid point to be evaluated, making
    the result identical to a completed sequential sweep.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return _dispatch(executor, red, k, kinds, cancellation)


class ParallelBoundEngine:
    """Reusable engine owning its thread pool.

    Each call gets its own shared maximum, so one engine may serve
    concurrent callers; the usual setup is one engine per search thread.
    """

    def __init__(
        self,
        kinds: Sequence[DffKind] = DEFAULT_DFF_ORDER,
        workers: int | None = None,
        cancellation: bool = True,
    ):
        self.kinds = tuple(kinds)
        self.workers = workers if workers is not None else default_workers()
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.cancellation = cancellation
        self._executor: ThreadPoolExecutor | None = None

    def __call__(self, red: ReducedInstance, k: int) -> BoundResult:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.workers)
        return _dispatch(self._executor, red, k, self.kinds, self.cancellation)

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "ParallelBoundEngine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
