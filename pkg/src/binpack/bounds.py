"""Lower bounds for bin packing: L1, L2, and six parameterized weight
transformations with the sequential best-bound sweep.

Each transformation f maps weights so that any set fitting in one bin keeps
a transformed sum at most f(c); dividing the transformed total by f(c) then
yields a valid bound, maximized over the integer parameter grid.  Parameter
grids are swept either scalar (exact, unbounded ints) or through a
vectorized twin used by the engines; both paths are property-tested equal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .instances import ReducedInstance

__all__ = [
    "DffKind",
    "DEFAULT_DFF_ORDER",
    "LambdaRange",
    "L2Partition",
    "BoundResult",
    "l1",
    "l2",
    "l2_partition",
    "l2_value",
    "dff_value",
    "lambda_range",
    "dff_bound",
    "dff_bound_batch",
    "lower_bound_seq",
]

#: Accumulator width assumed by the parameter cap of the VB2 sweep: the cap
#: keeps r * max_weight * lambda within an unsigned 64-bit accumulator.
VB2_ACCUMULATOR_MAX = 2**64 - 1

# Inputs within this envelope are safe for the int64 vectorized sweep; the
# scalar path handles anything larger exactly.
_VEC_MAX_C = 1 << 31
_VEC_MAX_R = 1 << 20


class DffKind(enum.Enum):
    """The six weight transformations, in default priority order."""

    MT = "MT"
    RAD2 = "RAD2"
    FS1 = "FS1"
    CCM1 = "CCM1"
    VB2 = "VB2"
    BJ1 = "BJ1"

    @classmethod
    def from_name(cls, name: str) -> "DffKind":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            valid = ", ".join(k.name for k in cls)
            raise ValueError(f"unknown DFF {name!r} (expected one of {valid})") from None


DEFAULT_DFF_ORDER: tuple[DffKind, ...] = tuple(DffKind)


@dataclass(frozen=True)
class LambdaRange:
    """Inclusive integer parameter interval; empty when lo > hi."""

    lo: int
    hi: int

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def __len__(self) -> int:
        return max(0, self.hi - self.lo + 1)

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, lam: int) -> bool:
        return self.lo <= lam <= self.hi


@dataclass(frozen=True)
class L2Partition:
    """Weights split by the two thresholds lambda and c/2."""

    w1: tuple[int, ...]  # c - lambda < w      (big: one bin each)
    w2: tuple[int, ...]  # c/2 < w <= c - lambda
    w3: tuple[int, ...]  # lambda <= w <= c/2
    lam: int


@dataclass
class BoundResult:
    """Outcome of a bound sweep."""

    lb: int
    per_dff: dict[DffKind, int] = field(default_factory=dict)
    exceeded_k: bool = False
    evals: int = 0  # number of (kind, lambda) grid points evaluated


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def l1(red: ReducedInstance) -> int:
    """Total weight over capacity, rounded up; 0 for no weights."""
    if not red.weights:
        return 0
    return _ceil_div(sum(red.weights), red.c)


def l2_partition(red: ReducedInstance, lam: int) -> L2Partition:
    c = red.c
    w1 = tuple(w for w in red.weights if c - lam < w)
    w2 = tuple(w for w in red.weights if 2 * w > c and w <= c - lam)
    w3 = tuple(w for w in red.weights if lam <= w and 2 * w <= c)
    return L2Partition(w1=w1, w2=w2, w3=w3, lam=lam)


def l2_value(red: ReducedInstance, lam: int) -> int:
    """Bound for one threshold: big and medium-big items get a bin each,
    medium-small items fill the slack left by the medium-big ones."""
    p = l2_partition(red, lam)
    slack = red.c * len(p.w2) - sum(p.w2)
    overflow = _ceil_div(sum(p.w3) - slack, red.c)
    return len(p.w1) + len(p.w2) + max(0, overflow)


def l2(red: ReducedInstance, full_sweep: bool = False) -> int:
    """Best threshold bound over lambda in [0, c/2].

    The default sweep visits 0 and the distinct weights at most c/2; the
    bound only improves at those points, so the restriction is
    value-preserving (the full sweep stays available for verification).
    """
    if not red.weights:
        return 0
    if full_sweep:
        lams: Sequence[int] = range(0, red.c // 2 + 1)
    else:
        lams = sorted({0} | {w for w in red.weights if 2 * w <= red.c})
    return max(l2_value(red, lam) for lam in lams)


def _mt(w: int, c: int, lam: int) -> int:
    if c - lam < w:
        return c
    if w < lam:
        return 0
    return w


def _rad2(w: int, c: int, lam: int) -> int:
    if w >= 2 * lam:
        return c - _rad2(c - w, c, lam)
    if w < lam:
        return 0
    if w <= c - 2 * lam:
        return c // 3
    return c // 2


def _fs1(w: int, c: int, lam: int) -> int:
    num = w * (lam + 1)
    q, rem = divmod(num, c)
    if rem == 0:
        return w * lam
    return q * c


def _ccm1(w: int, c: int, lam: int) -> int:
    if 2 * w > c:
        return 2 * (c // lam - (c - w) // lam)
    if 2 * w == c:
        return c // lam
    return 2 * (w // lam)


def _vb2(w: int, c: int, lam: int) -> int:
    def piece(v: int) -> int:
        return max(0, _ceil_div(v * lam, c) - 1)

    if 2 * w > c:
        return 2 * piece(c) - 2 * piece(c - w)
    if 2 * w == c:
        return piece(c)
    return 2 * piece(w)


def _bj1(w: int, c: int, lam: int) -> int:
    cm = c % lam
    base = (w // lam) * (lam - cm)
    wm = w % lam
    if wm <= cm:
        return base
    return base + wm - cm


_VALUE_FN: dict[DffKind, Callable[[int, int, int], int]] = {
    DffKind.MT: _mt,
    DffKind.RAD2: _rad2,
    DffKind.FS1: _fs1,
    DffKind.CCM1: _ccm1,
    DffKind.VB2: _vb2,
    DffKind.BJ1: _bj1,
}


def _mt_hi(c: int) -> int:
    # For odd capacities the midpoint parameter ceil(c/2) transforms integer
    # weights exactly like the real threshold c/2: weights strictly above
    # c/2 are raised to c (any two of them overflow a bin together, so dual
    # feasibility is preserved), everything else is dropped.  Without it the
    # sweep misses the bound that gives every above-half item its own bin.
    return 0 if c == 1 else (c + 1) // 2


def _domain_ok(kind: DffKind, c: int, lam: int) -> bool:
    if kind is DffKind.MT:
        return 0 <= lam <= _mt_hi(c)
    if kind is DffKind.RAD2:
        return 4 * lam > c and 3 * lam <= c
    if kind is DffKind.FS1:
        return 1 <= lam <= 100
    if kind is DffKind.CCM1:
        return 1 <= lam and 2 * lam <= c
    if kind is DffKind.VB2:
        return 2 <= lam <= c
    return 1 <= lam <= c  # BJ1


def dff_value(kind: DffKind, w: int, c: int, lam: int) -> int:
    """Transformed weight for one grid point.

    The parameter must satisfy the transformation's domain condition and
    0 <= w <= c (checked when assertions are enabled).
    """
    assert 0 <= w <= c, f"weight {w} outside [0, {c}]"
    assert _domain_ok(kind, c, lam), f"{kind.name}: lambda {lam} outside domain for c={c}"
    return _VALUE_FN[kind](w, c, lam)


def lambda_range(kind: DffKind, c: int, red: ReducedInstance | None = None) -> LambdaRange:
    """Integer parameter interval swept for ``kind`` at capacity ``c``.

    For VB2 the upper end is additionally capped so that the accumulated
    products r * max_weight * lambda stay within 64 unsigned bits; the cap
    needs the reduced instance and is skipped when none is given.
    """
    if kind is DffKind.MT:
        return LambdaRange(0, _mt_hi(c))
    if kind is DffKind.RAD2:
        return LambdaRange(c // 4 + 1, c // 3)
    if kind is DffKind.FS1:
        return LambdaRange(1, 100)
    if kind is DffKind.CCM1:
        return LambdaRange(1, c // 2)
    if kind is DffKind.VB2:
        hi = c
        if red is not None and red.r > 0:
            hi = min(hi, VB2_ACCUMULATOR_MAX // (red.r * red.max_weight))
        return LambdaRange(2, hi)
    return LambdaRange(1, c)  # BJ1


def dff_bound(kind: DffKind, red: ReducedInstance, lam: int) -> int:
    """Bound from a single grid point: ceil(sum f(w) / f(c)).

    A transformed capacity of zero contributes nothing (the point is
    skipped rather than treated as an error).
    """
    c = red.c
    fn = _VALUE_FN[kind]
    fc = fn(c, c, lam)
    if fc <= 0:
        return 0
    total = 0
    for w in red.weights:
        total += fn(w, c, lam)
    return _ceil_div(total, fc)


def _batch_matrix(kind: DffKind, w: np.ndarray, c: int, lam: np.ndarray) -> np.ndarray:
    # w has shape (r, 1), lam has shape (1, L); everything int64.
    if kind is DffKind.MT:
        return np.where(w > c - lam, c, np.where(w < lam, 0, w))
    if kind is DffKind.RAD2:
        third = c // 3
        half = c // 2

        def base(v: np.ndarray) -> np.ndarray:
            return np.where(v < lam, 0, np.where(v <= c - 2 * lam, third, half))

        return np.where(w >= 2 * lam, c - base(c - w), base(w))
    if kind is DffKind.FS1:
        num = w * (lam + 1)
        return np.where(num % c == 0, w * lam, (num // c) * c)
    if kind is DffKind.CCM1:
        cq = c // lam
        big = 2 * (cq - (c - w) // lam)
        return np.where(2 * w > c, big, np.where(2 * w == c, cq, 2 * (w // lam)))
    if kind is DffKind.VB2:
        def piece(v: np.ndarray) -> np.ndarray:
            return np.maximum(0, (v * lam + c - 1) // c - 1)

        pc = np.maximum(0, lam - 1)
        return np.where(2 * w > c, 2 * pc - 2 * piece(c - w),
                        np.where(2 * w == c, pc, 2 * piece(w)))
    # BJ1
    cm = c % lam
    base = (w // lam) * (lam - cm)
    wm = w % lam
    return np.where(wm <= cm, base, base + wm - cm)


# Weight histograms make the sweeps below O(grid + c log c) instead of
# O(grid * items); above this capacity the histogram itself is the cost.
_ANALYTIC_MAX_C = 1 << 22


class _Cumulatives:
    """Padded cumulative count/weight arrays over weight values [0, c]."""

    def __init__(self, red: ReducedInstance):
        c = red.c
        cnt = np.bincount(np.asarray(red.weights, dtype=np.int64), minlength=c + 1)
        self.count = np.zeros(c + 2, dtype=np.int64)
        np.cumsum(cnt, out=self.count[1:])
        self.wsum = np.zeros(c + 2, dtype=np.int64)
        np.cumsum(cnt * np.arange(c + 1, dtype=np.int64), out=self.wsum[1:])
        self.c = c
        self.r = red.r

    def n_le(self, v: np.ndarray | int) -> np.ndarray:
        return self.count[np.clip(v, -1, self.c) + 1]

    def w_le(self, v: np.ndarray | int) -> np.ndarray:
        return self.wsum[np.clip(v, -1, self.c) + 1]


def _segment_sums(contrib: np.ndarray, tmax: np.ndarray, size: int) -> np.ndarray:
    # Per-lambda sums of the flattened (lambda, t) contributions.
    out = np.zeros(size, dtype=np.int64)
    nonzero = tmax > 0
    if len(contrib):
        starts = np.cumsum(tmax) - tmax
        out[nonzero] = np.add.reduceat(contrib, starts[nonzero])
    return out


def _floor_div_sums(cum: _Cumulatives, lams: np.ndarray, hi_value: int,
                    n_le_hi: int) -> np.ndarray:
    # For each lambda: sum of floor(w / lambda) over weights w <= hi_value,
    # via sum over t >= 1 of #{w : t*lambda <= w <= hi_value}.
    tmax = hi_value // lams
    lam_rep = np.repeat(lams, tmax)
    starts = np.cumsum(tmax) - tmax
    t = np.arange(len(lam_rep), dtype=np.int64) - np.repeat(starts, tmax) + 1
    contrib = n_le_hi - cum.n_le(lam_rep * t - 1)
    return _segment_sums(contrib, tmax, len(lams))


def _sweep_mt(cum: _Cumulatives, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = cum.c
    sums = c * (cum.r - cum.n_le(c - lams)) + cum.w_le(c - lams) - cum.w_le(lams - 1)
    return sums, np.full(len(lams), c, dtype=np.int64)


def _sweep_rad2(cum: _Cumulatives, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = cum.c
    third, half = c // 3, c // 2
    n2 = cum.n_le(c - 2 * lams) - cum.n_le(lams - 1)
    n3 = cum.n_le(2 * lams - 1) - cum.n_le(c - 2 * lams)
    n4 = cum.n_le(c - lams) - cum.n_le(2 * lams - 1)
    n5 = cum.r - cum.n_le(c - lams)
    sums = n2 * third + n3 * half + n4 * (c - third) + n5 * c
    return sums, np.full(len(lams), c, dtype=np.int64)


def _sweep_ccm1(cum: _Cumulatives, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = cum.c
    below_half = (c - 1) // 2  # strictly below c/2
    n_small = int(cum.n_le(below_half))
    n_eq = int(cum.n_le(c // 2)) - n_small
    n_big = cum.r - int(cum.n_le(c // 2))
    cq = c // lams
    t_small = _floor_div_sums(cum, lams, below_half, n_small)
    # Mirror multiset c - w for weights above c/2: #{c - w >= t*lam} counts
    # weights in (c/2, c - t*lam].
    tmax = below_half // lams
    lam_rep = np.repeat(lams, tmax)
    starts = np.cumsum(tmax) - tmax
    t = np.arange(len(lam_rep), dtype=np.int64) - np.repeat(starts, tmax) + 1
    contrib = cum.n_le(c - lam_rep * t) - (cum.r - n_big)
    t_big = _segment_sums(contrib, tmax, len(lams))
    sums = 2 * t_small + n_eq * cq + 2 * n_big * cq - 2 * t_big
    return sums, 2 * cq


def _sweep_vb2(red: ReducedInstance, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = red.c
    smalls = [w for w in red.weights if 2 * w < c]
    mirrored = [c - w for w in red.weights if 2 * w > c and w < c]
    n_eq = sum(1 for w in red.weights if 2 * w == c)
    n_big = sum(1 for w in red.weights if 2 * w > c)
    lam_m1 = lams - 1

    # max(0, ceil(v*lam/c) - 1) = (v*lam - 1) // c for v >= 1, lam >= 2.
    def quotient_sum(values: list[int]) -> np.ndarray:
        if not values:
            return np.zeros(len(lams), dtype=np.int64)
        # int32 products cut memory traffic in half when they fit.
        if values[-1] * int(lams[-1]) < 2**31 - 1:
            col = np.asarray(values, dtype=np.int32).reshape(-1, 1)
            row = lams.astype(np.int32).reshape(1, -1)
        else:
            col = np.asarray(values, dtype=np.int64).reshape(-1, 1)
            row = lams.reshape(1, -1)
        return ((col * row - 1) // c).sum(axis=0, dtype=np.int64)

    smalls.sort()
    mirrored.sort()
    sums = (
        2 * quotient_sum(smalls)
        + (n_eq + 2 * n_big) * lam_m1
        - 2 * quotient_sum(mirrored)
    )
    return sums, 2 * lam_m1


def _sweep_bj1(cum: _Cumulatives, lams: np.ndarray,
               max_weight: int) -> tuple[np.ndarray, np.ndarray]:
    c = cum.c
    cm = c % lams
    cq = c // lams
    floor_sum = _floor_div_sums(cum, lams, max_weight, cum.r)
    # Remainder excess: sum of max(0, w % lambda - c % lambda), bucketed by
    # t = floor(w / lambda).
    tmax = max_weight // lams + 1
    lam_rep = np.repeat(lams, tmax)
    starts = np.cumsum(tmax) - tmax
    t = np.arange(len(lam_rep), dtype=np.int64) - np.repeat(starts, tmax)
    lo_v = lam_rep * t + np.repeat(cm, tmax)
    hi_v = lam_rep * (t + 1) - 1
    n_in = cum.n_le(hi_v) - cum.n_le(lo_v)
    w_in = cum.w_le(hi_v) - cum.w_le(lo_v)
    contrib = w_in - lo_v * n_in
    rem_sum = _segment_sums(contrib, tmax, len(lams))
    sums = (lams - cm) * floor_sum + rem_sum
    return sums, cq * (lams - cm)


def dff_bound_batch(kind: DffKind, red: ReducedInstance, lo: int, hi: int) -> np.ndarray:
    """Per-lambda bounds for the inclusive grid [lo, hi], as int64.

    Vectorized twin of :func:`dff_bound`, property-tested pointwise equal;
    falls back to the scalar path when the capacity or item count could
    overflow int64 intermediates.
    """
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    c = red.c
    if c > _VEC_MAX_C or red.r > _VEC_MAX_R:
        # Bound values never exceed the item count, so int64 output is safe.
        return np.array([dff_bound(kind, red, lam) for lam in range(lo, hi + 1)],
                        dtype=np.int64)
    lams = np.arange(lo, hi + 1, dtype=np.int64)
    if red.r == 0:
        return np.zeros(len(lams), dtype=np.int64)
    sweep = None
    if c <= _ANALYTIC_MAX_C:
        cum = _Cumulatives(red)
        if kind is DffKind.MT:
            sweep = _sweep_mt(cum, lams)
        elif kind is DffKind.RAD2:
            sweep = _sweep_rad2(cum, lams)
        elif kind is DffKind.CCM1:
            sweep = _sweep_ccm1(cum, lams)
        elif kind is DffKind.VB2:
            sweep = _sweep_vb2(red, lams)
        elif kind is DffKind.BJ1:
            sweep = _sweep_bj1(cum, lams, red.max_weight)
    if sweep is not None:
        sums, fc = sweep
    else:
        w = np.asarray(red.weights, dtype=np.int64).reshape(-1, 1)
        row = lams.reshape(1, -1)
        sums = _batch_matrix(kind, w, c, row).sum(axis=0, dtype=np.int64)
        fc = _batch_matrix(kind, np.array([[c]], dtype=np.int64), c, row)[0]
    safe = np.maximum(fc, 1)
    return np.where(fc > 0, (sums + safe - 1) // safe, 0)


def lower_bound_seq(
    red: ReducedInstance,
    k: int,
    kinds: Sequence[DffKind] = DEFAULT_DFF_ORDER,
) -> BoundResult:
    """Sequential sweep: maximize over kinds in order, each over its full
    parameter grid, returning early once the bound exceeds ``k``."""
    result = BoundResult(lb=0)
    for kind in kinds:
        rng = lambda_range(kind, red.c, red)
        best = 0
        if not rng.is_empty:
            values = dff_bound_batch(kind, red, rng.lo, rng.hi)
            result.evals += len(values)
            if len(values):
                best = int(values.max())
        result.per_dff[kind] = best
        if best > result.lb:
            result.lb = best
        if result.lb > k:
            result.exceeded_k = True
            return result
    result.exceeded_k = result.lb > k
    return result
