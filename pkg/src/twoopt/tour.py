"""Tours as position-indexed permutations, 2-OPT gains and segment reversal.

A move ``(i, j)`` with ``0 <= i < j < n`` removes the tour edges
``{order[i], order[i+1]}`` and ``{order[j], order[j+1]}`` (indices taken
cyclically) and reconnects by reversing ``order[i+1 .. j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from . import _kernels
from .instance import MIN_NODES, Instance, InvalidInstanceError, SeedLike, cost


@dataclass(eq=False)
class Tour:
    order: np.ndarray
    position: np.ndarray

    @classmethod
    def from_order(cls, order) -> Tour:
        order = np.array(order, dtype=np.int64)
        n = order.size
        if n < MIN_NODES:
            raise InvalidInstanceError(f"tour needs at least {MIN_NODES} nodes, got {n}")
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError("tour order must be a permutation of 0..n-1")
        position = np.empty(n, dtype=np.int64)
        position[order] = np.arange(n)
        return cls(order, position)

    @property
    def n(self) -> int:
        return self.order.size

    def copy(self) -> Tour:
        return Tour(self.order.copy(), self.position.copy())

    def is_valid(self) -> bool:
        n = self.n
        return (np.array_equal(np.sort(self.order), np.arange(n))
                and np.array_equal(self.position[self.order], np.arange(n)))

    def __iter__(self):
        return iter(self.order.tolist())


def random_tour(n: int, seed: SeedLike) -> Tour:
    if n < MIN_NODES:
        raise InvalidInstanceError(f"tour needs at least {MIN_NODES} nodes, got {n}")
    return Tour.from_order(np.random.default_rng(seed).permutation(n))


def tour_length(inst: Instance, t: Tour) -> float:
    mode, mat, pts = inst.kernel_args()
    return _kernels.tour_length(mode, mat, pts, t.order)


def is_degenerate(n: int, i: int, j: int) -> bool:
    """True when the two pivots are adjacent tour edges."""
    return j == i + 1 or (i == 0 and j == n - 1)


def _check_pair(n: int, i: int, j: int) -> None:
    if not (0 <= i < j < n):
        raise IndexError(f"move positions must satisfy 0 <= i < j < {n}, got ({i}, {j})")


def move_gain(inst: Instance, t: Tour, i: int, j: int) -> float:
    """Length decrease of the 2-OPT move ``(i, j)``; exactly 0 for adjacent pivots."""
    n = t.n
    _check_pair(n, i, j)
    o = t.order
    a, b = int(o[i]), int(o[(i + 1) % n])
    c, d = int(o[j]), int(o[(j + 1) % n])
    return (cost(inst, a, b) + cost(inst, c, d)) - (cost(inst, a, c) + cost(inst, b, d))


def apply_move(t: Tour, i: int, j: int) -> Tour:
    """Reverse ``order[i+1 .. j]`` in place and return the same tour."""
    n = t.n
    _check_pair(n, i, j)
    if is_degenerate(n, i, j):
        raise ValueError(f"pivots ({i}, {j}) are adjacent edges; not a 2-OPT move")
    _kernels.reverse_segment(t.order, t.position, i, j)
    return t


def write_tour(t: Tour, fh: IO[str]) -> None:
    fh.write("\n".join(str(v) for v in t.order.tolist()))
    fh.write("\n")


def read_tour(source: str | Path | IO[str]) -> Tour:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return Tour.from_order([int(tok) for tok in text.split()])
