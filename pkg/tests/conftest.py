"""Shared helpers for the test suite."""

from __future__ import annotations

import random

import pytest

from binpack import Instance, ReducedInstance


def random_instance(rng: random.Random, max_n: int = 10, max_c: int = 50) -> Instance:
    c = rng.randint(1, max_c)
    n = rng.randint(1, max_n)
    return Instance(c=c, weights=tuple(rng.randint(1, c) for _ in range(n)))


def random_reduced(rng: random.Random, max_r: int = 12, max_c: int = 100) -> ReducedInstance:
    c = rng.randint(1, max_c)
    r = rng.randint(0, max_r)
    return ReducedInstance(c=c, weights=tuple(rng.randint(1, c) for _ in range(r)))


def enumerate_packings(inst: Instance, masks: list[int], k: int):
    """All complete assignments within the candidate masks that respect the
    capacity, by recursive enumeration with load pruning."""
    n = inst.n
    loads = [0] * k
    assign = [0] * n
    out: list[tuple[int, ...]] = []

    def rec(i: int) -> None:
        if i == n:
            out.append(tuple(assign))
            return
        mask = masks[i]
        w = inst.weights[i]
        j = 0
        while mask:
            if mask & 1 and loads[j] + w <= inst.c:
                loads[j] += w
                assign[i] = j
                rec(i + 1)
                loads[j] -= w
            mask >>= 1
            j += 1

    rec(0)
    return out


@pytest.fixture
def fig1() -> Instance:
    # c=9, W=[4,4,3,3,2,2]: packs into two bins of load 9.
    return Instance(c=9, weights=(4, 4, 3, 3, 2, 2), name="fig1")
