import io
import math

import pytest

from twoopt.instance import from_points, gen_euclidean, gen_uniform
from twoopt.localsearch import (HybridConfig, is_local_optimum, run_ce_localsearch,
                                run_hybrid_localsearch)
from twoopt.search import SearchVariant
from twoopt.tour import Tour, random_tour, tour_length

CROSSING = [(0, 0), (1, 1), (1, 0), (0, 1)]


@pytest.fixture(scope="module")
def uniform1000():
    inst = gen_uniform(1000, 31)
    start = random_tour(1000, 32)
    ce = run_ce_localsearch(inst, start)
    hy = {b: run_hybrid_localsearch(inst, start, HybridConfig(b)) for b in (0.3, 0.4, 0.5)}
    return inst, start, ce, hy


def test_crossing_corners_one_iteration():
    inst = from_points(CROSSING)
    tour, trace = run_ce_localsearch(inst, Tour.from_order(range(4)))
    assert trace.L == 1
    assert trace.final_length == pytest.approx(4.0)
    assert trace.records[0].gain == pytest.approx(2 * math.sqrt(2) - 2)
    assert is_local_optimum(inst, tour)


def test_is_local_optimum_cases():
    inst = from_points(CROSSING)
    assert not is_local_optimum(inst, Tour.from_order(range(4)))
    ang = [2 * math.pi * k / 17 for k in range(17)]
    convex = from_points([(math.cos(a), math.sin(a)) for a in ang])
    assert is_local_optimum(convex, Tour.from_order(range(17)))


def test_start_tour_is_not_modified():
    inst, start = gen_uniform(60, 0), random_tour(60, 0)
    before = start.order.copy()
    run_hybrid_localsearch(inst, start)
    assert (start.order == before).all()


@pytest.mark.parametrize("gen", [gen_uniform, gen_euclidean])
def test_trace_invariants(gen):
    inst, start = gen(150, 4), random_tour(150, 4)
    tour, trace = run_ce_localsearch(inst, start)
    assert is_local_optimum(inst, tour)
    lengths = trace.lengths
    assert lengths[0] == pytest.approx(tour_length(inst, start))
    for r, prev, cur in zip(trace.records, lengths, lengths[1:]):
        assert r.gain > 0
        assert cur < prev
        assert prev - cur == pytest.approx(r.gain, rel=1e-9)
    assert trace.final_length == pytest.approx(lengths[-1], rel=1e-9)
    assert trace.avg_moves_per_iteration == 150 * 149 / 2


def test_switch_disabled_matches_ce():
    inst, start = gen_euclidean(80, 2), random_tour(80, 2)
    _, ce = run_ce_localsearch(inst, start)
    for v in (SearchVariant(), SearchVariant(True, True)):
        _, hy = run_hybrid_localsearch(inst, start, HybridConfig(0.4, v, switch_enabled=False))
        assert hy.s is None
        assert hy.L == ce.L
        assert hy.final_length == pytest.approx(ce.final_length, rel=1e-9)


def test_hybrid_variants_follow_ce_trajectory():
    inst, start = gen_uniform(200, 8), random_tour(200, 8)
    _, ce = run_ce_localsearch(inst, start)
    for v in (SearchVariant(True, False), SearchVariant(False, True), SearchVariant(True, True)):
        _, hy = run_hybrid_localsearch(inst, start, HybridConfig(0.4, v))
        assert [r.gain for r in hy.records] == pytest.approx([r.gain for r in ce.records], rel=1e-9)


@pytest.mark.parametrize("beta", [0.0, -0.1, 0.51, 1.0])
def test_hybrid_config_beta_range(beta):
    with pytest.raises(ValueError):
        HybridConfig(beta)


def test_max_iter_caps_run():
    inst, start = gen_uniform(100, 1), random_tour(100, 1)
    tour, trace = run_ce_localsearch(inst, start, max_iter=5)
    assert trace.L == 5
    assert not is_local_optimum(inst, tour)


def test_trace_csv():
    inst, start = gen_uniform(30, 0), random_tour(30, 0)
    _, trace = run_hybrid_localsearch(inst, start)
    buf = io.StringIO()
    trace.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "iter,algo,gain,evals,length"
    assert len(lines) == trace.L + 2


def test_uniform1000_convergence_length(uniform1000):
    _, _, (tour, ce), _ = uniform1000
    assert 600 <= ce.L <= 2400
    assert ce.avg_moves_per_iteration == 1000 * 999 / 2


def test_uniform1000_hybrid_equivalence_and_savings(uniform1000):
    inst, _, (_, ce), hybrids = uniform1000
    for beta, (tour, hy) in hybrids.items():
        assert hy.L == ce.L
        assert hy.lengths == pytest.approx(ce.lengths, rel=1e-6)
        assert is_local_optimum(inst, tour)
    assert hybrids[0.4][1].total_evaluations <= 0.7 * ce.total_evaluations


def test_switch_iteration_monotone_in_beta(uniform1000):
    _, _, _, hybrids = uniform1000
    s = [hybrids[b][1].s for b in (0.3, 0.4, 0.5)]
    assert None not in s
    assert s == sorted(s)
    # the iteration that triggered the switch ran the greedy search, the next one CE
    for b, (_, hy) in hybrids.items():
        rec = hy.records
        assert rec[hy.s - 1].algo == "greedy"
        assert rec[hy.s - 1].evals >= b * 1000 * 999
        assert all(r.algo == "ce" for r in rec[hy.s:])


@pytest.mark.slow
def test_switch_fraction_uniform2000():
    inst, start = gen_uniform(2000, 41), random_tour(2000, 42)
    for beta in (0.3, 0.4, 0.5):
        _, hy = run_hybrid_localsearch(inst, start, HybridConfig(beta))
        assert 0.55 <= hy.s / hy.L <= 0.9, (beta, hy.s, hy.L)
        if beta == 0.5:
            assert 0.6 <= hy.s / hy.L <= 0.85, (hy.s, hy.L)
