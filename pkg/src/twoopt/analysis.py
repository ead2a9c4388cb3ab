"""Probabilistic checks and complexity estimates for the pruned best-move searches.

Includes the distance-tail bound for two random points in the unit square and
its Monte-Carlo estimate, expected evaluation counts of the fixed-threshold
search, witnesses of "good" moves on uniform (long/short swaps) and Euclidean
(diagonal crosses) instances, and log-log power fitting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .instance import Instance, SeedLike, costs_between
from .search import best_move_ce, delta_euclidean, delta_uniform
from .tour import Tour

SQRT2 = math.sqrt(2.0)
TAIL_BOUND_MIN_D = 1.055

_MC_CHUNK = 1 << 20


# -- distance tail ------------------------------------------------------------

def tail_bound(d: float) -> float:
    """Upper bound ``7/16 * (1 - sqrt(d^2 - 1))^4`` on P(D > d), valid for 1.055 < d <= sqrt(2)."""
    if not (TAIL_BOUND_MIN_D < d <= SQRT2 + 1e-12):
        raise ValueError(f"tail bound holds only for {TAIL_BOUND_MIN_D} < d <= sqrt(2), got {d}")
    z = 1.0 - math.sqrt(max(d * d - 1.0, 0.0))
    return 7.0 / 16.0 * max(z, 0.0) ** 4


def mc_tail_probability(d: float, samples: int, seed: SeedLike) -> tuple[float, float]:
    """Fraction of random point pairs in the unit square farther apart than ``d``.

    Returns ``(estimate, binomial standard error)``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    d2 = d * d
    hits = 0
    left = samples
    while left:
        m = min(left, _MC_CHUNK)
        u = rng.random((m, 4))
        dx = u[:, 0] - u[:, 2]
        dy = u[:, 1] - u[:, 3]
        hits += int(np.count_nonzero(dx * dx + dy * dy > d2))
        left -= m
    p = hits / samples
    return p, math.sqrt(p * (1.0 - p) / samples)


def _tail_antiderivative(d: float) -> float:
    r = math.sqrt(d * d - 1.0)
    return (8.0 / 3.0 * r ** 3 - d ** 4 / 2.0 + (math.pi - 2.0) * d * d
            - 4.0 * d * d * math.acos(1.0 / d) + 4.0 * r)


def exact_tail_probability(d: float) -> float:
    """P(D > d) in closed form, for 1 <= d <= sqrt(2)."""
    if not 1.0 <= d <= SQRT2 + 1e-12:
        raise ValueError(f"closed form covers 1 <= d <= sqrt(2), got {d}")
    d = min(d, SQRT2)
    return max(_tail_antiderivative(SQRT2) - _tail_antiderivative(d), 0.0)


# -- expected work of the fixed-threshold search --------------------------------

def expected_evals_uniform(n: int, alpha: float) -> float:
    """``(n-3) * n * P(C > delta)`` with ``P(C > delta) = alpha / sqrt(n)``."""
    if n < 4 or alpha <= 0:
        raise ValueError("need n >= 4 and alpha > 0")
    return (n - 3) * n * alpha / math.sqrt(n)


def expected_evals_euclidean(n: int, alpha: float, samples: int = 10**7,
                             seed: SeedLike = 0) -> float:
    delta = delta_euclidean(n, alpha)
    if delta >= SQRT2:
        return 0.0
    p = 1.0 if delta < 0 else mc_tail_probability(delta, samples, seed)[0]
    return (n - 3) * n * p


# -- good moves and their witnesses ---------------------------------------------

def instance_is_good(inst: Instance, tour: Tour, delta_n: float) -> bool:
    """True iff some move gains more than ``2 * delta_n``."""
    return best_move_ce(inst, tour).move.gain > 2.0 * delta_n


def find_ls_move(inst: Instance, tour: Tour, alpha: float) -> tuple[int, int] | None:
    """A move swapping two long tour edges for two short edges, if any.

    Long means cost above ``(1 + delta)/2``, short below ``(1 - delta)/2``,
    with ``delta = 1 - alpha/sqrt(n)``.
    """
    n = inst.n
    delta = delta_uniform(n, alpha)
    mode, mat, pts = inst.kernel_args()
    ec = _kernels.edge_costs(mode, mat, pts, tour.order)
    long_pos = np.flatnonzero(ec > (1.0 + delta) / 2.0)
    if long_pos.size < 2:
        return None
    short = (1.0 - delta) / 2.0
    ii, jj = np.triu_indices(long_pos.size, 1)
    pi, pj = long_pos[ii], long_pos[jj]
    adjacent = (pj == pi + 1) | ((pi == 0) & (pj == n - 1))
    pi, pj = pi[~adjacent], pj[~adjacent]
    order = tour.order
    ok = ((costs_between(inst, order[pi], order[pj]) < short)
          & (costs_between(inst, order[(pi + 1) % n], order[(pj + 1) % n]) < short))
    hit = np.flatnonzero(ok)
    return (int(pi[hit[0]]), int(pj[hit[0]])) if hit.size else None


def ls_move_exists(inst: Instance, tour: Tour, alpha: float) -> bool:
    return find_ls_move(inst, tour, alpha) is not None


Box = tuple[float, float, float, float]  # x0, x1, y0, y1


@dataclass(frozen=True)
class GridCells:
    """Four corner cells of side ``s`` used to build diagonal crosses.

    A1/B1 flank the top-left corner, A2/B2 the bottom-right one.  An A1-A2 or
    B1-B2 edge is a long diagonal; A1-B1 and A2-B2 edges are short.
    """

    s: float
    A1: Box
    A2: Box
    B1: Box
    B2: Box

    @classmethod
    def build(cls, n: int, lam: float) -> GridCells:
        if lam <= 0:
            raise ValueError("lambda must be positive")
        s = lam * n ** -0.25
        if 3.0 * s > 0.5:
            raise ValueError(f"lambda={lam} too large for n={n}: cells do not fit")
        return cls(s,
                   A1=(s, 2 * s, 1 - s, 1.0),
                   A2=(1 - 2 * s, 1 - s, 0.0, s),
                   B1=(0.0, s, 1 - 2 * s, 1 - s),
                   B2=(1 - s, 1.0, s, 2 * s))

    @property
    def min_diagonal(self) -> float:
        return SQRT2 - 3 * SQRT2 * self.s

    @property
    def max_corner(self) -> float:
        return 2 * SQRT2 * self.s


def box_min_distance(a: Box, b: Box) -> float:
    dx = max(a[0] - b[1], b[0] - a[1], 0.0)
    dy = max(a[2] - b[3], b[2] - a[3], 0.0)
    return math.hypot(dx, dy)


def box_max_distance(a: Box, b: Box) -> float:
    dx = max(abs(a[1] - b[0]), abs(b[1] - a[0]))
    dy = max(abs(a[3] - b[2]), abs(b[3] - a[2]))
    return math.hypot(dx, dy)


def _in_box(pts: np.ndarray, box: Box) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return (x >= box[0]) & (x <= box[1]) & (y >= box[2]) & (y <= box[3])


def find_d_uncrossing(inst: Instance, tour: Tour, lam: float) -> tuple[int, int] | None:
    """Positions ``(i, j)`` of a directed A1->A2 edge and a directed B1->B2 edge, if both exist."""
    if inst.points is None:
        raise ValueError("diagonal crosses need a point instance")
    cells = GridCells.build(inst.n, lam)
    p = inst.points[tour.order]
    q = np.roll(p, -1, axis=0)
    a = np.flatnonzero(_in_box(p, cells.A1) & _in_box(q, cells.A2))
    b = np.flatnonzero(_in_box(p, cells.B1) & _in_box(q, cells.B2))
    if a.size == 0 or b.size == 0:
        return None
    i, j = int(a[0]), int(b[0])
    return (min(i, j), max(i, j))


def d_uncross_exists(inst: Instance, tour: Tour, lam: float) -> bool:
    return find_d_uncrossing(inst, tour, lam) is not None


def d_uncross_gain_bound(n: int, lam: float) -> float:
    """Every diagonal-uncrossing move gains more than this (``2*(sqrt2 - 5*sqrt2*lam*n^-1/4)``)."""
    return 2.0 * (SQRT2 - 5.0 * SQRT2 * lam * n ** -0.25)


# -- reference curves (plotting / report columns) ----------------------------------

def ls_absent_limit(alpha: float) -> float:
    """Large-n bound on the chance that a random tour has no long/short swap."""
    return math.exp(-((alpha / 4.0) ** 4))


def alpha_for_probability(p: float) -> float:
    """Smallest ``alpha`` whose long/short limit guarantees a good instance w.p. ``p``."""
    return 4.0 * math.log(1.0 / (1.0 - p)) ** 0.25


def d_cross_absent_bound(n: int, lam: float) -> float:
    return 2.0 * (1.0 - lam ** 4 / n) ** (n / 2.0)


def d_cross_absent_limit(lam: float) -> float:
    return 2.0 / math.sqrt(math.exp(lam ** 4))


def lambda_for_probability(p: float) -> float:
    return (2.0 * math.log(2.0 / (1.0 - p))) ** 0.25


# -- power fits -------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual: float

    def __call__(self, n):
        return self.a * np.asarray(n, dtype=float) ** self.b


def power_fit(points: Iterable[Sequence[float]], exponent: float | None = None) -> FitResult:
    """Fit ``y = a * n**b`` by least squares on ``(log n, log y)``.

    With ``exponent`` given, only ``a`` is fitted.  ``residual`` is the mean
    squared error in log space.
    """
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] != 2:
        raise ValueError("power_fit needs at least 3 (n, value) pairs")
    if np.any(data <= 0):
        raise ValueError("power_fit needs positive sizes and values")
    x, y = np.log(data[:, 0]), np.log(data[:, 1])
    if exponent is None:
        b, c = np.polyfit(x, y, 1)
    else:
        b = float(exponent)
        c = float(np.mean(y - b * x))
    resid = float(np.mean((y - (c + b * x)) ** 2))
    return FitResult(float(math.exp(c)), float(b), resid)
