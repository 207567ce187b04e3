"""Problem instances: representation, file I/O, reduction, and generation.

An instance is a bin capacity plus a multiset of item weights.  Files use
the plain text layout ``n``, ``c``, then ``n`` weights (one token each,
whitespace separated); lines starting with ``#`` are comments.  A second
entry point reads the multi-instance container format (count header, then
per instance: name line, ``c n best`` line, ``n`` weights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .store import DomainStore

__all__ = [
    "Instance",
    "ReducedInstance",
    "WeibullSpec",
    "ParseError",
    "parse_instance",
    "parse_falkenauer",
    "format_instance",
    "write_instance",
    "generate_weibull",
    "reduce_packing",
]

#: RNG algorithm used by the generator; recorded in report headers so runs
#: can be reproduced across machines.
GENERATOR_RNG = "numpy-PCG64"


class ParseError(ValueError):
    """Malformed instance text; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Instance:
    """A bin packing instance: capacity ``c`` and item weights."""

    c: int
    weights: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.c < 1:
            raise ValueError(f"capacity must be >= 1, got {self.c}")
        if len(self.weights) < 1:
            raise ValueError("instance must have at least one item")
        for w in self.weights:
            if not 1 <= w <= self.c:
                raise ValueError(f"weight {w} outside [1, {self.c}]")
        object.__setattr__(self, "weights", tuple(self.weights))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)


@dataclass(frozen=True)
class ReducedInstance:
    """Weights derived from a partial packing: unpacked items plus one
    virtual item per non-empty bin.  May be empty."""

    c: int
    weights: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.c < 1:
            raise ValueError(f"capacity must be >= 1, got {self.c}")
        for w in self.weights:
            if not 1 <= w <= self.c:
                raise ValueError(f"reduced weight {w} outside [1, {self.c}]")
        object.__setattr__(self, "weights", tuple(self.weights))

    @property
    def r(self) -> int:
        return len(self.weights)

    @property
    def max_weight(self) -> int:
        return max(self.weights) if self.weights else 0


@dataclass(frozen=True)
class WeibullSpec:
    """Parameters for random instance generation.

    ``shape``/``scale`` parameterize the Weibull distribution; ``sigma``
    scales the largest drawn weight into the bin capacity.
    """

    n: int
    shape: float
    scale: float
    sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("shape and scale must be positive")
        if self.sigma < 1.0:
            raise ValueError("sigma must be >= 1.0")


def _tokens_with_lines(text: str) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for tok in body.split():
            out.append((lineno, tok))
    return out


def _to_int(tok: tuple[int, str], what: str) -> int:
    lineno, text = tok
    try:
        return int(text)
    except ValueError:
        raise ParseError(lineno, f"expected integer {what}, got {text!r}") from None


def parse_instance(text: str, name: str = "") -> Instance:
    """Parse the ``n`` / ``c`` / weights layout into an :class:`Instance`.

    Raises :class:`ParseError` (with line number) on malformed tokens,
    an item-count mismatch, a non-positive capacity, or out-of-range weights.
    """
    toks = _tokens_with_lines(text)
    if not toks:
        raise ParseError(1, "empty instance file")
    n = _to_int(toks[0], "item count")
    if n < 1:
        raise ParseError(toks[0][0], f"item count must be >= 1, got {n}")
    if len(toks) < 2:
        raise ParseError(toks[0][0], "missing capacity")
    c = _to_int(toks[1], "capacity")
    if c <= 0:
        raise ParseError(toks[1][0], f"capacity must be positive, got {c}")
    body = toks[2:]
    if len(body) < n:
        last_line = toks[-1][0]
        raise ParseError(last_line, f"expected {n} weights, found {len(body)}")
    if len(body) > n:
        raise ParseError(body[n][0], f"expected {n} weights, found {len(body)}")
    weights = []
    for tok in body:
        w = _to_int(tok, "weight")
        if w <= 0:
            raise ParseError(tok[0], f"weight must be positive, got {w}")
        if w > c:
            raise ParseError(tok[0], f"weight {w} exceeds capacity {c}")
        weights.append(w)
    return Instance(c=c, weights=tuple(weights), name=name)


def parse_falkenauer(text: str) -> list[tuple[Instance, int]]:
    """Parse a multi-instance container; returns (instance, best_known) pairs.

    Layout: instance count, then per instance a name line, a ``c n best``
    line, and ``n`` weight tokens.
    """
    lines = [
        (no, ln.split("#", 1)[0].strip())
        for no, ln in enumerate(text.splitlines(), start=1)
    ]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines:
        raise ParseError(1, "empty container file")
    pos = 0
    count = _to_int((lines[pos][0], lines[pos][1].split()[0]), "instance count")
    pos += 1
    out: list[tuple[Instance, int]] = []
    for _ in range(count):
        if pos >= len(lines):
            raise ParseError(lines[-1][0], "unexpected end of container")
        name = lines[pos][1].split()[0]
        pos += 1
        if pos >= len(lines):
            raise ParseError(lines[-1][0], f"{name}: missing header line")
        header = lines[pos][1].split()
        if len(header) < 3:
            raise ParseError(lines[pos][0], f"{name}: expected 'c n best' header")
        c = _to_int((lines[pos][0], header[0]), "capacity")
        n = _to_int((lines[pos][0], header[1]), "item count")
        best = _to_int((lines[pos][0], header[2]), "best known")
        pos += 1
        weights: list[int] = []
        while len(weights) < n:
            if pos >= len(lines):
                raise ParseError(lines[-1][0], f"{name}: expected {n} weights")
            lineno, ln = lines[pos]
            for tok in ln.split():
                weights.append(_to_int((lineno, tok), "weight"))
            pos += 1
        if len(weights) > n:
            raise ParseError(lines[pos - 1][0], f"{name}: expected {n} weights")
        for w in weights:
            if not 1 <= w <= c:
                raise ParseError(lines[pos - 1][0], f"{name}: weight {w} outside [1, {c}]")
        out.append((Instance(c=c, weights=tuple(weights), name=name), best))
    return out


def format_instance(inst: Instance, metadata: str | None = None) -> str:
    """Serialize to the ``n`` / ``c`` / weights layout (token round-trip safe)."""
    lines = []
    if metadata is not None:
        lines.append(f"# {metadata}")
    lines.append(str(inst.n))
    lines.append(str(inst.c))
    lines.extend(str(w) for w in inst.weights)
    return "\n".join(lines) + "\n"


def write_instance(inst: Instance, path, metadata: str | None = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_instance(inst, metadata=metadata))


def generate_weibull(spec: WeibullSpec) -> Instance:
    """Draw a random instance from the given Weibull parameters.

    Samples are rounded half-up and clamped to at least 1; the capacity is
    ``ceil(sigma * max(weights))``.  Deterministic for a fixed seed.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    samples = spec.scale * rng.weibull(spec.shape, spec.n)
    weights = tuple(max(1, math.floor(s + 0.5)) for s in samples)
    # Fraction keeps ceil(sigma * max) exact; a float product can land one
    # ulp above an integer and shift the capacity.
    c = math.ceil(Fraction(spec.sigma) * max(weights))
    name = f"weibull-n{spec.n}-seed{spec.seed}"
    return Instance(c=c, weights=weights, name=name)


def weibull_metadata(spec: WeibullSpec) -> str:
    """Sidecar comment line recording the generator parameters."""
    return (
        f"weibull n={spec.n} shape={spec.shape} scale={spec.scale} "
        f"sigma={spec.sigma} seed={spec.seed} rng={GENERATOR_RNG}"
    )


def reduce_packing(inst: Instance, store: "DomainStore") -> ReducedInstance:
    """Rewrite a partial packing as a fresh instance.

    Keeps the weights of all items whose bin is still open (more than one
    candidate) and adds one virtual item per bin with a positive committed
    load, weighing the bin's committed sum.  Zero-load bins contribute
    nothing.  Fails if a committed load exceeds the capacity.
    """
    if store.n != inst.n:
        raise ValueError(f"store has {store.n} items, instance has {inst.n}")
    weights: list[int] = []
    for i in range(store.n):
        if not store.is_assigned(i):
            weights.append(inst.weights[i])
    for j in range(store.k):
        load = store.committed_load[j]
        if load > inst.c:
            raise ValueError(f"bin {j} committed load {load} exceeds capacity {inst.c}")
        if load > 0:
            weights.append(load)
    return ReducedInstance(c=inst.c, weights=tuple(weights))


def reduce_weights(inst: Instance) -> ReducedInstance:
    """Reduction of the empty packing: just the original weights."""
    return ReducedInstance(c=inst.c, weights=inst.weights)


def iter_weight_multiset(weights: Iterable[int]) -> list[int]:
    """Sorted copy, for order-insensitive comparisons in reports/tests."""
    return sorted(weights)
