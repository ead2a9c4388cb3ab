"""Seeded experiment plans: best-move trials, convergence runs and validators.

Trials follow the scheme "``instances`` random instances per size, ``tours``
random tours per instance".  Every instance seed is ``[seed, n, k, 1]`` and
every tour seed ``[seed, n, k, 2, t + 1]`` (numpy ``SeedSequence`` entropy),
so any single trial can be regenerated on its own.
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Callable, Iterable

import numpy as np

from . import analysis
from .instance import Instance, cmin_table, gen_euclidean, gen_uniform, read_tsplib
from .localsearch import HybridConfig, run_ce_localsearch, run_hybrid_localsearch
from .search import (BestMoveResult, SearchVariant, best_move_blind, best_move_ce,
                     best_move_fixed_threshold, best_move_greedy, delta_euclidean,
                     delta_uniform, lambda_from_alpha)
from .tour import Tour, random_tour

ALGORITHMS = ("ce", "greedy", "blind", "fixed")
DEFAULT_ALPHA = {"uniform": 1.89, "euclidean": 2.5}
DEFAULT_SIZES = (1000, 2000, 4000, 8000)

TRIAL_COLUMNS = ["algo", "variant", "n", "seed", "trial", "moves_evaluated",
                 "edges_expanded", "selections", "gain", "found"]
AGGREGATE_COLUMNS = ["dist", "n", "trials", "ce", "greedy", "blind", "fixed", "fbar",
                     "ce_over_greedy", "blind_over_greedy"]
CONVERGE_COLUMNS = ["n", "instance", "tour", "algo", "beta", "L", "s", "total_evals",
                    "impr_tot", "evals_100", "impr_100", "evals_to_s", "ce_evals_to_s",
                    "avg_mpi", "final_length"]
VALIDATE_COLUMNS = ["check", "n", "alpha_or_lambda", "trials", "successes", "bound", "pass"]


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentPlan:
    distribution: str = "uniform"
    sizes: tuple[int, ...] = DEFAULT_SIZES
    instances_per_size: int = 10
    tours_per_instance: int = 10
    algorithms: tuple[str, ...] = ALGORITHMS
    variant: SearchVariant = SearchVariant()
    alpha: float | None = None
    delta: float | None = None
    betas: tuple[float, ...] = (0.3, 0.4, 0.5)
    seed: int = 0
    tsplib_path: str | None = None
    workers: int = 1
    fbar_samples: int = 10**7
    timing: bool = False

    def __post_init__(self):
        if self.distribution not in ("uniform", "euclidean", "tsplib"):
            raise PlanError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "tsplib" and not self.tsplib_path:
            raise PlanError("tsplib distribution needs a file path")
        if self.distribution != "tsplib" and not self.sizes:
            raise PlanError("no instance sizes given")
        if self.instances_per_size * self.tours_per_instance < 1:
            raise PlanError("need at least one trial per size")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise PlanError(f"unknown algorithms: {sorted(bad)}")
        if "fixed" in self.algorithms and self.delta is None and self.distribution == "tsplib":
            raise PlanError("fixed threshold on TSPLIB instances needs an explicit delta")

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return DEFAULT_ALPHA.get(self.distribution, DEFAULT_ALPHA["euclidean"])

    def threshold(self, n: int) -> float:
        if self.delta is not None:
            return self.delta
        if self.distribution == "uniform":
            return delta_uniform(n, self.effective_alpha)
        return delta_euclidean(n, self.effective_alpha)

    def instance_seed(self, n: int, k: int) -> list[int]:
        return [self.seed, n, k, 1]

    def tour_seed(self, n: int, k: int, t: int) -> list[int]:
        return [self.seed, n, k, 2, t + 1]

    def make_instance(self, n: int, k: int) -> Instance:
        if self.distribution == "uniform":
            return gen_uniform(n, self.instance_seed(n, k))
        if self.distribution == "euclidean":
            return gen_euclidean(n, self.instance_seed(n, k))
        return read_tsplib(self.tsplib_path)

    def units(self) -> list[tuple[int, int]]:
        """``(n, instance index)`` work units in output order."""
        if self.distribution == "tsplib":
            return [(0, 0)]
        return [(n, k) for n in self.sizes for k in range(self.instances_per_size)]


@dataclass
class Trial:
    n: int
    instance: int
    tour: int
    trial: int
    delta: float
    results: dict[str, BestMoveResult] = field(default_factory=dict)
    seconds: dict[str, float] = field(default_factory=dict)
    extra: dict[str, object] = field(default_factory=dict)


Probe = Callable[[Instance, Tour, "Trial"], None]


def _run_unit(plan: ExperimentPlan, n: int, k: int, probe: Probe | None) -> list[Trial]:
    inst = plan.make_instance(n, k)
    n = inst.n
    cmin = cmin_table(inst) if plan.variant.strong_pivots else None
    delta = plan.threshold(n)
    out = []
    for t in range(plan.tours_per_instance):
        tour = random_tour(n, plan.tour_seed(n, k, t))
        trial = Trial(n, k, t, k * plan.tours_per_instance + t, delta)
        for algo in plan.algorithms:
            t0 = time.perf_counter()
            if algo == "ce":
                res = best_move_ce(inst, tour)
            elif algo == "greedy":
                res = best_move_greedy(inst, tour, plan.variant, cmin)
            elif algo == "blind":
                res = best_move_blind(inst, tour, plan.variant, cmin)
            else:
                res = best_move_fixed_threshold(inst, tour, delta)
            trial.results[algo] = res
            trial.seconds[algo] = time.perf_counter() - t0
        if probe is not None:
            probe(inst, tour, trial)
        out.append(trial)
    return out


def run_trials(plan: ExperimentPlan, probe: Probe | None = None) -> list[Trial]:
    """Run every algorithm of the plan on every trial; output order is deterministic."""
    units = plan.units()
    if plan.workers > 1:
        with ThreadPoolExecutor(plan.workers) as pool:
            chunks = list(pool.map(lambda u: _run_unit(plan, u[0], u[1], probe), units))
    else:
        chunks = [_run_unit(plan, n, k, probe) for n, k in units]
    trials = [t for chunk in chunks for t in chunk]
    trials.sort(key=lambda t: (t.n, t.instance, t.tour))
    return trials


def _fmt(x: float) -> str:
    return repr(float(x))


def trial_columns(plan: ExperimentPlan) -> list[str]:
    return TRIAL_COLUMNS + ["seconds"] if plan.timing else TRIAL_COLUMNS


def trial_rows(plan: ExperimentPlan, trials: Iterable[Trial]) -> list[list]:
    """Per-trial rows; wall-clock ``seconds`` only when the plan asks for timing."""
    rows = []
    for tr in trials:
        for algo in plan.algorithms:
            res = tr.results[algo]
            variant = plan.variant.label if algo in ("greedy", "blind") else ""
            row = [algo, variant, tr.n, plan.seed, tr.trial, res.stats.moves_evaluated,
                   res.stats.edges_expanded, res.stats.selections,
                   _fmt(res.move.gain) if res.found else "", int(res.found)]
            if plan.timing:
                row.append(f"{tr.seconds[algo]:.6f}")
            rows.append(row)
    return rows


@dataclass
class SizeAggregate:
    n: int
    trials: int
    means: dict[str, float]
    fbar: float | None

    def ratio(self, num: str, den: str) -> float | None:
        if num in self.means and den in self.means and self.means[den] > 0:
            return self.means[num] / self.means[den]
        return None


def fbar_oracle(plan: ExperimentPlan, n: int) -> float | None:
    if plan.delta is not None or plan.distribution == "tsplib":
        return None
    if plan.distribution == "uniform":
        return analysis.expected_evals_uniform(n, plan.effective_alpha)
    return analysis.expected_evals_euclidean(n, plan.effective_alpha, plan.fbar_samples,
                                             seed=[plan.seed, n, 3])


def aggregate(plan: ExperimentPlan, trials: list[Trial], with_fbar: bool = True) -> list[SizeAggregate]:
    out = []
    for n in sorted({t.n for t in trials}):
        group = [t for t in trials if t.n == n]
        means = {algo: float(np.mean([t.results[algo].stats.moves_evaluated for t in group]))
                 for algo in plan.algorithms}
        fbar = fbar_oracle(plan, n) if with_fbar and "fixed" in plan.algorithms else None
        out.append(SizeAggregate(n, len(group), means, fbar))
    return out


def aggregate_rows(plan: ExperimentPlan, aggs: list[SizeAggregate]) -> list[list]:
    def cell(x):
        return "" if x is None else _fmt(x)

    return [[plan.distribution, a.n, a.trials,
             *(cell(a.means.get(algo)) for algo in ALGORITHMS),
             cell(a.fbar), cell(a.ratio("ce", "greedy")), cell(a.ratio("blind", "greedy"))]
            for a in aggs]


def write_csv(fh: IO[str], columns: list[str], rows: Iterable[list],
              stamp: str | None = None) -> None:
    if stamp:
        fh.write(f"# {stamp}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


# -- convergence ------------------------------------------------------------------

@dataclass
class ConvergeRun:
    n: int
    instance: int
    tour: int
    algo: str
    beta: float | None
    trace: object


def run_converge(plan: ExperimentPlan, trace_sink: Callable[[ConvergeRun], None] | None = None
                 ) -> list[list]:
    """CE local search plus one hybrid run per beta, from the same start tours."""
    rows = []
    for n, k in plan.units():
        inst = plan.make_instance(n, k)
        n = inst.n
        for t in range(plan.tours_per_instance):
            start = random_tour(n, plan.tour_seed(n, k, t))
            _, ce = run_ce_localsearch(inst, start)
            runs = [ConvergeRun(n, k, t, "ce", None, ce)]
            for beta in plan.betas:
                _, hy = run_hybrid_localsearch(inst, start, HybridConfig(beta, plan.variant))
                runs.append(ConvergeRun(n, k, t, "hybrid", beta, hy))
            ce_total = ce.total_evaluations
            ce_100 = ce.evaluations_first(100)
            for run in runs:
                tr = run.trace
                s = tr.s
                rows.append([n, k, t, run.algo if run.beta is None else f"hybrid-{plan.variant.label}",
                             "" if run.beta is None else _fmt(run.beta), tr.L,
                             "" if s is None else s, tr.total_evaluations,
                             _fmt(1.0 - tr.total_evaluations / ce_total),
                             tr.evaluations_first(100),
                             _fmt(1.0 - tr.evaluations_first(100) / ce_100) if ce_100 else "",
                             "" if s is None else tr.evaluations_first(s),
                             "" if s is None else ce.evaluations_first(s),
                             _fmt(tr.avg_moves_per_iteration), _fmt(tr.final_length)])
                if trace_sink is not None:
                    trace_sink(run)
    return rows


# -- validation ------------------------------------------------------------------

TAIL_POINTS = (1.06, 1.1, 1.2, 1.3, 1.41)


def _rel_equal(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _validation_probe(plan: ExperimentPlan, lam: float | None):
    def probe(inst: Instance, tour: Tour, trial: Trial) -> None:
        if plan.distribution == "uniform":
            trial.extra["ls"] = analysis.ls_move_exists(inst, tour, plan.effective_alpha)
        elif plan.distribution == "euclidean" and lam is not None:
            try:
                trial.extra["dcross"] = analysis.d_uncross_exists(inst, tour, lam)
            except ValueError:
                pass
    return probe


def run_validate(plan: ExperimentPlan, tail_samples: int = 10**7) -> list[list]:
    """Validator rows ``check,n,alpha_or_lambda,trials,successes,bound,pass``."""
    plan = replace(plan, algorithms=ALGORITHMS)
    alpha = plan.effective_alpha
    lam = lambda_from_alpha(alpha) if plan.distribution == "euclidean" else None
    trials = run_trials(plan, _validation_probe(plan, lam))
    rows = []
    param = _fmt(alpha)
    for n in sorted({t.n for t in trials}):
        group = [t for t in trials if t.n == n]
        m = len(group)
        exact = sum(_rel_equal(t.results[a].gain, t.results["ce"].gain)
                    for t in group for a in ("greedy", "blind"))
        rows.append(["exactness", n, param, 2 * m, exact, "1.0", int(exact == 2 * m)])
        ok = sum(t.results["fixed"].found
                 and _rel_equal(t.results["fixed"].gain, t.results["ce"].gain) for t in group)
        rows.append(["alg_success", n, param, m, ok, "0.99", int(ok >= 0.99 * m)])
        good = [t for t in group if t.results["ce"].gain > 2 * t.delta]
        dom = sum(set(t.results["greedy"].expanded_edges.tolist())
                  <= set(t.results["fixed"].expanded_edges.tolist()) for t in good)
        rows.append(["dominance", n, param, len(good), dom, "1.0", int(dom == len(good))])
        good_ok = sum(_rel_equal(t.results["fixed"].gain, t.results["ce"].gain) for t in good)
        rows.append(["good_instance_success", n, param, len(good), good_ok, "1.0",
                     int(good_ok == len(good))])
        if plan.distribution == "uniform":
            with_ls = [t for t in group if t.extra.get("ls")]
            absent = m - len(with_ls)
            bound = analysis.ls_absent_limit(alpha)
            sigma = math.sqrt(max(bound * (1 - bound), 0.25 / m) / m)
            rows.append(["ls_absent_frequency", n, param, m, absent, _fmt(bound),
                         int(absent / m <= bound + 3 * sigma)])
            ls_good = sum(t.results["ce"].gain > 2 * t.delta for t in with_ls)
            rows.append(["ls_implies_good", n, param, len(with_ls), ls_good, "1.0",
                         int(ls_good == len(with_ls))])
        elif lam is not None and any("dcross" in t.extra for t in group):
            with_d = [t for t in group if t.extra.get("dcross")]
            absent = m - len(with_d)
            bound = min(1.0, analysis.d_cross_absent_bound(n, lam))
            sigma = math.sqrt(max(bound * (1 - bound), 0.25 / m) / m)
            rows.append(["dcross_absent_frequency", n, _fmt(lam), m, absent, _fmt(bound),
                         int(absent / m <= bound + 3 * sigma)])
            d_good = sum(t.results["ce"].gain > analysis.d_uncross_gain_bound(n, lam)
                         for t in with_d)
            rows.append(["dcross_implies_good", n, _fmt(lam), len(with_d), d_good, "1.0",
                         int(d_good == len(with_d))])
    for i, d in enumerate(TAIL_POINTS):
        p, se = analysis.mc_tail_probability(d, tail_samples, [plan.seed, 7, i])
        bound = analysis.tail_bound(d)
        hits = round(p * tail_samples)
        rows.append(["tail_bound", "", _fmt(d), tail_samples, hits, _fmt(bound),
                     int(p <= bound + 3 * se)])
    return rows
