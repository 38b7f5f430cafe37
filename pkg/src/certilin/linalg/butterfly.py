"""Butterfly networks of 2x2 switches [[1, a], [1, 1 + a]].

Wiring: pad the dimension to the next power of two 2**L.  Level l
(l = 0 .. L-1) pairs index i with i + 2**l for every i whose bit l is zero.
Pairs that touch a padding index (>= m) are dropped, so a network on m
rows has at most m*ceil(log2 m)/2 switches and depth ceil(log2 m).
Switches are applied level by level, in the order listed.

U A mixes rows generically; the leading columns of a network are fixed
(U e_0 is all ones), so column-side preconditioning uses the transpose,
A U^T, whose leading columns are generic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..arith import ceil_log2
from ..errors import DimensionMismatch


@dataclass(frozen=True)
class ButterflySwitch:
    alpha: int
    i: int
    j: int

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError("switch needs 0 <= i < j")


@dataclass(frozen=True)
class ButterflyNetwork:
    dimension: int
    switches: tuple

    def __post_init__(self):
        m = self.dimension
        if len(self.switches) > m * ceil_log2(m):
            raise ValueError("too many switches for the dimension")
        if any(s.j >= m for s in self.switches):
            raise ValueError("switch index outside the network")

    @property
    def depth(self) -> int:
        return ceil_log2(self.dimension)

    def to_payload(self) -> list:
        return [[s.alpha, s.i, s.j] for s in self.switches]

    @classmethod
    def from_payload(cls, m: int, payload) -> ButterflyNetwork:
        return cls(m, tuple(ButterflySwitch(int(a), int(i), int(j)) for a, i, j in payload))


def butterfly_wiring(m: int) -> list:
    """The (i, j) pairs of the network on m rows, in application order."""
    pairs = []
    size = 1 << ceil_log2(m)
    level = 1
    while level < size:
        for i in range(size):
            if not i & level and i + level < m:
                pairs.append((i, i + level))
        level <<= 1
    return pairs


def butterfly_sample(m: int, subset_size: int, rng) -> ButterflyNetwork:
    """Random network on m rows with every alpha uniform in {0, ..., subset_size-1}."""
    if subset_size < 2:
        raise ValueError("the sampling subset needs at least two elements")
    draw = rng.randbelow if hasattr(rng, "randbelow") else rng.randrange
    return ButterflyNetwork(m, tuple(ButterflySwitch(draw(subset_size), i, j) for i, j in butterfly_wiring(m)))


def butterfly_apply(U: ButterflyNetwork, v, p: Optional[int] = None, counter=None) -> list:
    """U v, switch by switch: (v_i, v_j) <- (v_i + a v_j, v_i + (1 + a) v_j)."""
    if len(v) != U.dimension:
        raise DimensionMismatch(f"vector of length {len(v)} for a network on {U.dimension} rows")
    v = list(v)
    for s in U.switches:
        a, b = v[s.i], v[s.j]
        x = a + s.alpha * b
        y = x + b
        if p is not None:
            x %= p
            y %= p
        v[s.i], v[s.j] = x, y
    if counter is not None:
        counter.scalar += 3 * len(U.switches)
    return v


def butterfly_transpose_apply(U: ButterflyNetwork, v, p: Optional[int] = None, counter=None) -> list:
    """U^T v: transposed switches [[1, 1], [a, 1 + a]] in reverse order."""
    if len(v) != U.dimension:
        raise DimensionMismatch(f"vector of length {len(v)} for a network on {U.dimension} rows")
    v = list(v)
    for s in reversed(U.switches):
        a, b = v[s.i], v[s.j]
        x = a + b
        y = s.alpha * x + b
        if p is not None:
            x %= p
            y %= p
        v[s.i], v[s.j] = x, y
    if counter is not None:
        counter.scalar += 3 * len(U.switches)
    return v


def butterfly_apply_block(U: ButterflyNetwork, X: np.ndarray, p: int) -> np.ndarray:
    """Apply U to every column of X (rows indexed by the network) modulo p."""
    X = X.copy()
    for s in U.switches:
        a, b = X[s.i], X[s.j]
        x = (a + s.alpha * b) % p
        X[s.j] = (x + b) % p
        X[s.i] = x
    return X


def butterfly_transpose_apply_block(U: ButterflyNetwork, X: np.ndarray, p: int) -> np.ndarray:
    """Apply U^T to every column of X modulo p."""
    X = X.copy()
    for s in reversed(U.switches):
        a, b = X[s.i], X[s.j]
        x = (a + b) % p
        X[s.j] = (s.alpha * x + b) % p
        X[s.i] = x
    return X
