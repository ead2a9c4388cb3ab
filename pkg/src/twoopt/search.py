"""Best 2-OPT move search: complete enumeration, greedy and blind pruning, fixed threshold.

The greedy and blind searches are exact.  They rely on the fact that any move
beating the current champion of gain ``g`` has at least one pivot edge
costing more than ``g / 2``: pivots are expanded only while that can still
hold.  The fixed-threshold search expands every tour edge costing more than
a constant ``delta`` and may miss the optimum.

Move evaluations are the complexity measure throughout; an expansion of one
pivot evaluates its ``n - 3`` non-adjacent partners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .instance import CminTable, Instance
from .tour import Tour

_EMPTY_CMIN = np.empty(0)
_EMPTY_LOG = np.empty((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class Move:
    i: int
    j: int
    gain: float


@dataclass
class SearchStats:
    moves_evaluated: int = 0
    edges_expanded: int = 0
    selections: int = 0


@dataclass(frozen=True)
class SearchVariant:
    """Optional refinements of the greedy/blind searches.

    ``strong_pivots`` keys each pivot by its cost minus the mean of the
    cheapest edges at its two endpoints; ``dedup`` never evaluates a pair of
    pivots twice.
    """

    strong_pivots: bool = False
    dedup: bool = False

    @property
    def label(self) -> str:
        parts = [name for name, on in (("strong", self.strong_pivots), ("dedup", self.dedup)) if on]
        return "+".join(parts) or "basic"

    @classmethod
    def parse(cls, text: str | None) -> SearchVariant:
        flags = {tok.strip() for tok in (text or "").split(",") if tok.strip()}
        unknown = flags - {"strong", "dedup", "basic"}
        if unknown:
            raise ValueError(f"unknown variant flags: {sorted(unknown)}")
        return cls(strong_pivots="strong" in flags, dedup="dedup" in flags)


ALL_VARIANTS = tuple(SearchVariant(s, d) for s in (False, True) for d in (False, True))


@dataclass
class BestMoveResult:
    move: Move | None
    stats: SearchStats
    expanded_edges: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    evaluated_pairs: np.ndarray | None = None

    @property
    def found(self) -> bool:
        return self.move is not None

    @property
    def gain(self) -> float:
        return self.move.gain if self.move is not None else -math.inf


def _result(raw, n: int, record: bool = False, log: np.ndarray | None = None) -> BestMoveResult:
    found, bi, bj, best, evals, selections, expanded, log_len = raw
    move = Move(int(bi), int(bj), float(best)) if found else None
    stats = SearchStats(int(evals), int(expanded.size), int(selections))
    pairs = log[:log_len].copy() if record else None
    return BestMoveResult(move, stats, expanded, pairs)


def best_move_ce(inst: Instance, tour: Tour) -> BestMoveResult:
    """Scan all ``n(n-1)/2`` position pairs; adjacent pairs count but never win."""
    mode, mat, pts = inst.kernel_args()
    bi, bj, best, evals = _kernels.best_move_ce(mode, mat, pts, tour.order)
    return BestMoveResult(Move(int(bi), int(bj), float(best)),
                          SearchStats(int(evals), 0, 0))


def _pruned_args(inst: Instance, variant: SearchVariant, cmin: CminTable | None,
                 record: bool):
    if variant.strong_pivots:
        if cmin is None:
            raise ValueError("strong_pivots needs the instance's CminTable")
        if cmin.values.size != inst.n:
            raise ValueError("CminTable does not match the instance size")
        cvals = cmin.values
    else:
        cvals = _EMPTY_CMIN
    n = inst.n
    log = np.empty((n * (n - 3), 2), dtype=np.int64) if record else _EMPTY_LOG
    return cvals, log


def best_move_greedy(inst: Instance, tour: Tour, variant: SearchVariant = SearchVariant(),
                     cmin: CminTable | None = None, record_pairs: bool = False) -> BestMoveResult:
    """Expand pivots from a max-heap of edge keys while the top key beats half the champion."""
    cvals, log = _pruned_args(inst, variant, cmin, record_pairs)
    mode, mat, pts = inst.kernel_args()
    raw = _kernels.best_move_greedy(mode, mat, pts, tour.order, cvals,
                                    variant.strong_pivots, variant.dedup, log, record_pairs)
    return _result(raw, inst.n, record_pairs, log)


def best_move_blind(inst: Instance, tour: Tour, variant: SearchVariant = SearchVariant(),
                    cmin: CminTable | None = None, record_pairs: bool = False) -> BestMoveResult:
    """Scan pivots in tour order, expanding those whose key beats half the champion."""
    cvals, log = _pruned_args(inst, variant, cmin, record_pairs)
    mode, mat, pts = inst.kernel_args()
    raw = _kernels.best_move_blind(mode, mat, pts, tour.order, cvals,
                                   variant.strong_pivots, variant.dedup, log, record_pairs)
    return _result(raw, inst.n, record_pairs, log)


def best_move_fixed_threshold(inst: Instance, tour: Tour, delta_n: float) -> BestMoveResult:
    """Expand exactly the tour edges costing more than ``delta_n``.

    ``move`` is None when no edge qualifies; otherwise it is the best move
    having at least one expanded pivot, which need not be optimal.
    """
    if delta_n < 0:
        raise ValueError(f"delta_n must be non-negative, got {delta_n}")
    mode, mat, pts = inst.kernel_args()
    raw = _kernels.best_move_fixed(mode, mat, pts, tour.order, float(delta_n))
    return _result(raw, inst.n)


def delta_uniform(n: int, alpha: float) -> float:
    """Threshold ``1 - alpha / sqrt(n)`` for U[0, 1] costs."""
    if n < 4 or alpha <= 0:
        raise ValueError("need n >= 4 and alpha > 0")
    return 1.0 - alpha * n ** -0.5


def delta_euclidean(n: int, alpha: float) -> float:
    """Threshold ``sqrt(2) - alpha * n**(-1/4)`` for points in the unit square."""
    if n < 4 or alpha <= 0:
        raise ValueError("need n >= 4 and alpha > 0")
    return math.sqrt(2.0) - alpha * n ** -0.25


def alpha_from_lambda(lam: float) -> float:
    """Euclidean ``alpha`` for grid-cell parameter ``lam`` (``alpha = 5*sqrt(2)*lam``)."""
    return 5.0 * math.sqrt(2.0) * lam


def lambda_from_alpha(alpha: float) -> float:
    return alpha / (5.0 * math.sqrt(2.0))


