"""Best-improvement 2-OPT local search, plain and with the greedy-to-enumeration switch."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO

from .instance import Instance, cmin_table
from .search import SearchVariant, best_move_ce, best_move_greedy
from .tour import Tour, apply_move, tour_length


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    algo: str
    i: int
    j: int
    gain: float
    evals: int
    length: float


@dataclass
class ConvergenceTrace:
    """One convergence run.

    ``records`` holds the applied moves (iterations ``1 .. L``).  The final
    search that certified the local optimum is not a record; its evaluations
    are in ``final_evals`` and included in ``total_evaluations``.
    """

    start_length: float
    records: list[IterationRecord] = field(default_factory=list)
    switch_iteration: int | None = None
    final_evals: int = 0
    final_algo: str = ""
    final_length: float = 0.0

    @property
    def L(self) -> int:
        return len(self.records)

    @property
    def s(self) -> int | None:
        return self.switch_iteration

    @property
    def total_evaluations(self) -> int:
        return sum(r.evals for r in self.records) + self.final_evals

    @property
    def avg_moves_per_iteration(self) -> float:
        return self.total_evaluations / (self.L + 1)

    def evaluations_first(self, k: int) -> int:
        return sum(r.evals for r in self.records[:k])

    @property
    def lengths(self) -> list[float]:
        return [self.start_length] + [r.length for r in self.records]

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iter", "algo", "gain", "evals", "length"])
        for r in self.records:
            writer.writerow([r.iteration, r.algo, repr(r.gain), r.evals, repr(r.length)])
        writer.writerow([self.L + 1, self.final_algo, "", self.final_evals, repr(self.final_length)])


@dataclass(frozen=True)
class HybridConfig:
    """Switch to complete enumeration once an iteration evaluates ``>= beta*n*(n-1)`` moves."""

    beta: float = 0.4
    variant: SearchVariant = SearchVariant()
    switch_enabled: bool = True

    def __post_init__(self):
        if not 0 < self.beta <= 0.5:
            raise ValueError(f"beta must be in (0, 1/2], got {self.beta}")


def _converge(inst: Instance, start_tour: Tour, pick, max_iter: int | None):
    tour = start_tour.copy()
    length = tour_length(inst, tour)
    trace = ConvergenceTrace(start_length=length)
    it = 0
    while True:
        it += 1
        algo, res = pick(tour, it)
        move = res.move
        if move is None or not move.gain > 0 or (max_iter is not None and it > max_iter):
            trace.final_evals = res.stats.moves_evaluated
            trace.final_algo = algo
            break
        apply_move(tour, move.i, move.j)
        length -= move.gain
        trace.records.append(IterationRecord(it, algo, move.i, move.j, move.gain,
                                             res.stats.moves_evaluated, length))
    trace.final_length = tour_length(inst, tour)
    return tour, trace


def run_ce_localsearch(inst: Instance, start_tour: Tour,
                       max_iter: int | None = None) -> tuple[Tour, ConvergenceTrace]:
    return _converge(inst, start_tour, lambda tour, it: ("ce", best_move_ce(inst, tour)), max_iter)


def run_hybrid_localsearch(inst: Instance, start_tour: Tour, cfg: HybridConfig = HybridConfig(),
                           max_iter: int | None = None) -> tuple[Tour, ConvergenceTrace]:
    n = inst.n
    budget = cfg.beta * n * (n - 1)
    cmin = cmin_table(inst) if cfg.variant.strong_pivots else None
    switched_at: list[int] = []

    def pick(tour, it):
        if switched_at:
            return "ce", best_move_ce(inst, tour)
        res = best_move_greedy(inst, tour, cfg.variant, cmin)
        if cfg.switch_enabled and res.stats.moves_evaluated >= budget:
            switched_at.append(it)
        return "greedy", res

    tour, trace = _converge(inst, start_tour, pick, max_iter)
    trace.switch_iteration = switched_at[0] if switched_at else None
    return tour, trace


def is_local_optimum(inst: Instance, tour: Tour) -> bool:
    return not best_move_ce(inst, tour).move.gain > 0
