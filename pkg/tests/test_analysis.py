import math

import numpy as np
import pytest
from scipy import integrate

from twoopt import analysis
from twoopt.analysis import GridCells, box_max_distance, box_min_distance
from twoopt.instance import from_matrix, from_points, gen_euclidean, gen_uniform
from twoopt.search import best_move_ce, delta_euclidean, delta_uniform
from twoopt.tour import Tour, random_tour

SQRT2 = math.sqrt(2)

SIZES = [2000, 4000, 6000, 8000, 10000, 12000, 14000, 16000, 18000, 20000, 22000, 24000]
UNIFORM_GREEDY = [106462, 304987, 560647, 871001, 1201409, 1567947, 1986524, 2453347,
                  2910420, 3368334, 3963375, 4486287]
EUCLID_GREEDY = [15786, 32811, 46710, 61073, 78926, 93552, 110450, 124632, 141852,
                 156056, 169574, 181513]


def distance_pdf(d):
    """Density of the distance between two uniform points in the unit square."""
    if d <= 1:
        return 2 * d * (math.pi - 4 * d + d * d)
    return 2 * d * (4 * math.sqrt(d * d - 1) - (d * d + 2 - math.pi) - 4 * math.acos(1 / d))


def exact_tail(d):
    return integrate.quad(distance_pdf, d, SQRT2, epsabs=1e-14, epsrel=1e-12)[0]


def test_distance_pdf_normalized():
    total = integrate.quad(distance_pdf, 0, 1)[0] + integrate.quad(distance_pdf, 1, SQRT2)[0]
    assert total == pytest.approx(1.0, abs=1e-10)


def test_tail_bound_values():
    assert analysis.tail_bound(SQRT2) == pytest.approx(0.0, abs=1e-15)
    z = 1 - math.sqrt(0.21)
    assert analysis.tail_bound(1.1) == pytest.approx(7 / 16 * z ** 4, rel=1e-12)
    assert analysis.tail_bound(1.1) == pytest.approx(0.0376833, rel=1e-5)


@pytest.mark.parametrize("d", [1.0, 1.055, 0.5, 1.5])
def test_tail_bound_range(d):
    with pytest.raises(ValueError):
        analysis.tail_bound(d)


def test_tail_bound_decreasing_and_above_exact_tail():
    ds = np.linspace(1.056, SQRT2, 200)
    vals = [analysis.tail_bound(d) for d in ds]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    for d in ds[::10]:
        assert exact_tail(d) <= analysis.tail_bound(d) + 1e-15


@pytest.mark.parametrize("d", [1.0, 1.04, 1.1, 1.2134, 1.3, 1.41, SQRT2])
def test_exact_tail_closed_form(d):
    assert analysis.exact_tail_probability(d) == pytest.approx(exact_tail(d), rel=1e-8, abs=1e-14)


def test_exact_tail_range():
    with pytest.raises(ValueError):
        analysis.exact_tail_probability(0.9)


def test_mc_tail_edges():
    assert analysis.mc_tail_probability(0.0, 10**4, 1) == (1.0, 0.0)
    assert analysis.mc_tail_probability(SQRT2, 10**4, 1) == (0.0, 0.0)
    with pytest.raises(ValueError):
        analysis.mc_tail_probability(1.2, 0, 1)


def test_mc_tail_deterministic_and_consistent():
    a = analysis.mc_tail_probability(1.1, 2 * 10**6, [3])
    assert a == analysis.mc_tail_probability(1.1, 2 * 10**6, [3])
    p, se = a
    assert abs(p - exact_tail(1.1)) <= 4 * se
    p12, se12 = analysis.mc_tail_probability(1.2, 10**7, [4])
    assert p12 <= analysis.tail_bound(1.2) + 3 * se12


def test_expected_evals_uniform():
    v = analysis.expected_evals_uniform(2000, 1.89)
    assert v == pytest.approx((2000 - 3) * 2000 * 1.89 / math.sqrt(2000))
    assert v == pytest.approx(168790, rel=0.01)
    assert v == pytest.approx(169447, rel=0.02)
    assert analysis.expected_evals_uniform(4, 1.5) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        analysis.expected_evals_uniform(3, 1.0)


@pytest.mark.parametrize("n, table", [(2000, 63100), (24000, 672629)])
def test_expected_evals_euclidean(n, table):
    est = analysis.expected_evals_euclidean(n, 2.5, 10**7, seed=[n])
    assert est == pytest.approx(table, rel=0.03)
    p = exact_tail(delta_euclidean(n, 2.5))
    exact = (n - 3) * n * p
    se = (n - 3) * n * math.sqrt(p * (1 - p) / 10**7)
    assert abs(est - exact) <= 4 * se


def test_expected_evals_euclidean_tiny_alpha():
    # the threshold is within float noise of sqrt(2): nothing is longer
    assert analysis.expected_evals_euclidean(100, 1e-12, 10**4) == 0.0


def test_instance_is_good():
    inst, t = gen_uniform(40, 2), random_tour(40, 2)
    best = best_move_ce(inst, t).gain
    assert best > 0
    assert analysis.instance_is_good(inst, t, 0.0)
    assert not analysis.instance_is_good(inst, t, best / 2)
    assert analysis.instance_is_good(inst, t, best / 2 - 1e-9)


def test_ls_move_all_half():
    m = np.full((30, 30), 0.5)
    np.fill_diagonal(m, 0)
    assert not analysis.ls_move_exists(from_matrix(m), random_tour(30, 0), 1.89)


def test_ls_move_handbuilt():
    m = np.full((4, 4), 0.5)
    np.fill_diagonal(m, 0)
    m[0, 1] = m[1, 0] = m[2, 3] = m[3, 2] = 1.0
    m[0, 2] = m[2, 0] = m[1, 3] = m[3, 1] = 0.0
    inst = from_matrix(m)
    t = Tour.from_order(range(4))
    assert analysis.find_ls_move(inst, t, 1.0) == (0, 2)
    assert analysis.ls_move_exists(inst, t, 1.0)


def test_ls_moves_are_good():
    hits = 0
    for seed in range(300):
        inst, t = gen_uniform(300, [seed, 1]), random_tour(300, [seed, 2])
        mv = analysis.find_ls_move(inst, t, 3.0)
        if mv is None:
            continue
        hits += 1
        assert best_move_ce(inst, t).gain > 2 * delta_uniform(300, 3.0)
    assert hits > 50


def test_ls_absent_frequency_below_limit():
    p = 0.9
    alpha = analysis.alpha_for_probability(p)
    assert alpha == pytest.approx(4 * math.log(10) ** 0.25)
    assert analysis.ls_absent_limit(alpha) == pytest.approx(1 - p)
    trials = 300
    absent = sum(not analysis.ls_move_exists(gen_uniform(1000, [s, 1]), random_tour(1000, [s, 2]),
                                             alpha)
                 for s in range(trials))
    sigma = math.sqrt(p * (1 - p) / trials)
    assert absent / trials <= (1 - p) + 3 * sigma


@pytest.mark.parametrize("n, lam", [(16, 0.3), (1000, 0.35), (10**4, 1.0), (10**6, 2.0)])
def test_grid_cells_geometry(n, lam):
    c = GridCells.build(n, lam)
    s = lam * n ** -0.25
    assert c.s == pytest.approx(s)
    for lo, hi in ((c.A1, c.A2), (c.B1, c.B2)):
        assert box_min_distance(lo, hi) >= c.min_diagonal - 1e-12
        assert box_min_distance(lo, hi) >= SQRT2 * (1 - 3 * s) - 1e-12
    for a, b in ((c.A1, c.B1), (c.A2, c.B2)):
        span = max(box_max_distance(x, y) for x in (a, b) for y in (a, b))
        assert span <= c.max_corner + 1e-12
    # corner-point brute force agrees with the box formulas
    def corners(box):
        return [(x, y) for x in box[:2] for y in box[2:]]
    assert min(math.dist(p, q) for p in corners(c.A1) for q in corners(c.A2)) >= c.min_diagonal - 1e-12
    assert max(math.dist(p, q) for p in corners(c.A1) + corners(c.B1)
               for q in corners(c.A1) + corners(c.B1)) <= c.max_corner + 1e-12


def test_grid_cells_too_large():
    with pytest.raises(ValueError):
        GridCells.build(16, 1.0)
    with pytest.raises(ValueError):
        GridCells.build(100, 0.0)


def _cell_point(rng, box):
    return (rng.uniform(box[0], box[1]), rng.uniform(box[2], box[3]))


def test_d_uncross_one_point_per_cell():
    rng = np.random.default_rng(0)
    c = GridCells.build(4, 0.2)
    pts = [_cell_point(rng, b) for b in (c.A1, c.A2, c.B1, c.B2)]
    inst = from_points(pts)
    t = Tour.from_order(range(4))
    assert analysis.find_d_uncrossing(inst, t, 0.2) == (0, 2)
    assert best_move_ce(inst, t).gain > analysis.d_uncross_gain_bound(4, 0.2)


def test_d_uncross_center_points():
    rng = np.random.default_rng(1)
    inst = from_points(0.4 + 0.2 * rng.random((50, 2)))
    assert not analysis.d_uncross_exists(inst, random_tour(50, 0), 0.35)


def test_d_uncross_needs_points():
    with pytest.raises(ValueError):
        analysis.d_uncross_exists(gen_uniform(10, 0), random_tour(10, 0), 0.3)


def test_planted_d_uncrossings_are_good():
    rng = np.random.default_rng(5)
    lam, n = 0.35, 200
    c = GridCells.build(n, lam)
    for trial in range(200):
        pts = rng.random((n, 2))
        t = random_tour(n, [5, trial])
        i, j = sorted(rng.choice(n - 1, 2, replace=False).tolist())
        if j - i < 2:
            continue
        for pos, box in ((i, c.A1), (i + 1, c.A2), (j, c.B1), (j + 1, c.B2)):
            pts[t.order[pos]] = _cell_point(rng, box)
        inst = from_points(pts)
        assert analysis.d_uncross_exists(inst, t, lam)
        assert best_move_ce(inst, t).gain > analysis.d_uncross_gain_bound(n, lam)


def test_d_uncross_gain_bound_matches_threshold():
    lam = 1 / (2 * SQRT2)
    assert analysis.d_uncross_gain_bound(2000, lam) == pytest.approx(2 * delta_euclidean(2000, 2.5))


def test_reference_curves():
    assert analysis.d_cross_absent_bound(10**6, 1.0) == pytest.approx(
        analysis.d_cross_absent_limit(1.0), rel=1e-5)
    lam = analysis.lambda_for_probability(0.9)
    assert 1 - analysis.d_cross_absent_limit(lam) == pytest.approx(0.9)


def test_power_fit_exact_recovery():
    pts = [(n, 2 * n ** 1.5) for n in (100, 400, 1600, 6400)]
    fit = analysis.power_fit(pts)
    assert fit.a == pytest.approx(2, rel=1e-9)
    assert fit.b == pytest.approx(1.5, rel=1e-9)
    assert fit.residual < 1e-20
    fixed = analysis.power_fit(pts, exponent=1.5)
    assert fixed.a == pytest.approx(2, rel=1e-9)
    assert fit(400) == pytest.approx(16000)


@pytest.mark.parametrize("pts", [[(1, 1), (2, 2)], [(1, 1), (2, 0), (3, 3)], [(0, 1), (2, 2), (3, 3)]])
def test_power_fit_rejects(pts):
    with pytest.raises(ValueError):
        analysis.power_fit(pts)


def test_power_fit_paper_tables():
    uni = analysis.power_fit(list(zip(SIZES, UNIFORM_GREEDY)))
    euc = analysis.power_fit(list(zip(SIZES, EUCLID_GREEDY)))
    assert 1.40 <= uni.b <= 1.60
    assert 0.90 <= euc.b <= 1.15
    assert analysis.power_fit(list(zip(SIZES, UNIFORM_GREEDY)), 1.5).a == pytest.approx(1.20, abs=0.06)
    assert analysis.power_fit(list(zip(SIZES, EUCLID_GREEDY)), 1.0).a == pytest.approx(7.7, abs=0.4)
