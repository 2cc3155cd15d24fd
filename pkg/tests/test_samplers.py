import io
import math

import numpy as np
import pytest

from frontier.errors import BudgetError
from frontier.graphs import load_graph
from frontier.rng import RngStream
from frontier.samplers import (
    DEFAULT_COST,
    CostModel,
    StartMode,
    discard_burn_in,
    distributed_fs,
    frontier_sampling,
    multiple_rw,
    random_edge_sample,
    random_vertex_sample,
    read_trace_csv,
    single_rw,
    write_trace_csv,
)


def _assert_walk_is_continuous(trace, graph):
    """Each walker's recorded edges must chain and follow adjacency."""
    last = {int(w): int(s) for w, s in enumerate(trace.start_vertices.tolist())}
    for u, v, w in zip(trace.u.tolist(), trace.v.tolist(), trace.walker.tolist()):
        assert last[w] == u
        assert graph.has_edge(u, v)
        last[w] = v


# -- budget accounting ---------------------------------------------------------


def test_fs_step_count_and_spend(tri_pendant):
    # ceil((B - m*c) / step): 100 - 2 = 98 steps
    tr = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 100.0,
                           DEFAULT_COST, RngStream(0))
    assert tr.n_steps == 98
    assert tr.spent == 100.0
    assert tr.meta["start_cost_total"] == 2.0


def test_fs_fractional_budget_rounds_up(tri_pendant):
    tr = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 100.5,
                           DEFAULT_COST, RngStream(0))
    assert tr.n_steps == 99
    assert tr.spent == 101.0  # the crossing step is charged in full


def test_fs_explicit_starts_are_free(tri_pendant):
    tr = frontier_sampling(tri_pendant, 2, StartMode.explicit([0, 2]), 100.0,
                           DEFAULT_COST, RngStream(0))
    assert tr.start_vertices.tolist() == [0, 2]
    assert tr.n_steps == 100


def test_single_rw_budget(tri_pendant):
    tr = single_rw(tri_pendant, StartMode.uniform(), 50.0, RngStream(1))
    assert tr.n_steps == 49
    assert tr.m == 1


def test_mrw_splits_budget_evenly(tri_pendant):
    # share 20 per walker, minus start cost -> 19 steps each
    tr = multiple_rw(tri_pendant, 5, StartMode.uniform(), 100.0,
                     DEFAULT_COST, RngStream(2))
    assert tr.walker_steps().tolist() == [19] * 5
    assert tr.spent == 100.0


def test_mrw_floors_fractional_share(tri_pendant):
    # share 33.33 -> 32 whole steps after the start query
    tr = multiple_rw(tri_pendant, 3, StartMode.uniform(), 100.0,
                     DEFAULT_COST, RngStream(2))
    assert tr.walker_steps().tolist() == [32, 32, 32]
    assert tr.spent == 99.0


def test_budget_errors():
    g = load_graph("0 1\n1 2\n0 2\n2 3\n")
    with pytest.raises(BudgetError):
        frontier_sampling(g, 4, StartMode.uniform(), 4.0, DEFAULT_COST, RngStream(0))
    with pytest.raises(BudgetError):
        multiple_rw(g, 4, StartMode.uniform(), 7.0, DEFAULT_COST, RngStream(0))
    with pytest.raises(BudgetError):
        single_rw(g, StartMode.uniform(), 1.0, RngStream(0))
    with pytest.raises(BudgetError):
        random_vertex_sample(g, 0.5, DEFAULT_COST, RngStream(0))
    with pytest.raises(BudgetError):
        random_edge_sample(g, 1.0, DEFAULT_COST, RngStream(0))
    with pytest.raises(BudgetError):
        distributed_fs(g, 2, 0.0, StartMode.uniform(), RngStream(0))


def test_hit_ratio_inflates_start_price(tri_pendant):
    cost = CostModel(vertex_hit_ratio=0.25)
    assert cost.effective_start_cost == 4.0
    tr = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 100.0, cost,
                           RngStream(0))
    assert tr.n_steps == 92  # 100 - 2*4


def test_stochastic_starts_vary_by_seed(tri_pendant):
    cost = CostModel(vertex_hit_ratio=0.5, stochastic_starts=True)
    spends = {frontier_sampling(tri_pendant, 2, StartMode.uniform(), 100.0,
                                cost, RngStream(s)).meta["start_cost_total"]
              for s in range(40)}
    assert len(spends) > 1
    assert all(s == int(s) and s >= 2 for s in spends)  # whole queries
    mean = np.mean([frontier_sampling(tri_pendant, 1, StartMode.uniform(), 100.0,
                                      cost, RngStream(s)).meta["start_cost_total"]
                    for s in range(400)])
    assert abs(mean - 2.0) < 4 * math.sqrt(2.0 / 400)  # Geometric(1/2) mean/var = 2


# -- trace validity ---------------------------------------------------------------


def test_fs_trace_is_valid(tri_pendant):
    tr = frontier_sampling(tri_pendant, 3, StartMode.uniform(), 500.0,
                           DEFAULT_COST, RngStream(3))
    assert tr.method == "fs"
    assert tr.graph_hash == tri_pendant.graph_hash
    assert tr.walker.min() >= 0 and tr.walker.max() < 3
    _assert_walk_is_continuous(tr, tri_pendant)


def test_mrw_trace_is_valid(tri_pendant):
    tr = multiple_rw(tri_pendant, 3, StartMode.uniform(), 300.0,
                     DEFAULT_COST, RngStream(4))
    _assert_walk_is_continuous(tr, tri_pendant)


def test_rw_trace_is_valid(tri_pendant):
    tr = single_rw(tri_pendant, StartMode.degree_proportional(), 200.0, RngStream(5))
    _assert_walk_is_continuous(tr, tri_pendant)


def test_dfs_trace_is_valid(tri_pendant):
    tr = distributed_fs(tri_pendant, 3, 500.0, StartMode.uniform(), RngStream(6))
    assert tr.method == "dfs"
    _assert_walk_is_continuous(tr, tri_pendant)
    assert np.all(np.diff(tr.time) > 0)  # global event order
    assert tr.time[-1] <= 500.0
    assert tr.spent == tr.time[-1]
    assert np.allclose(np.cumsum(tr.cost), tr.time)


def test_dfs_event_rate(tri_pendant):
    # expected events in [0, T] is T * m * avg_degree once time-stationary
    T, m = 5000.0, 2
    tr = distributed_fs(tri_pendant, m, T, StartMode.uniform(), RngStream(7))
    expected = T * m * tri_pendant.average_degree
    assert abs(tr.n_steps - expected) < 5 * math.sqrt(expected)


def test_random_vertex_trace(tri_pendant):
    tr = random_vertex_sample(tri_pendant, 100.0, DEFAULT_COST, RngStream(8))
    assert tr.vertex_only
    assert np.all(tr.u == -1)
    assert tr.n_steps == 100
    assert tr.spent == 100.0


def test_random_vertex_hit_ratio():
    g = load_graph("0 1\n1 2\n0 2\n2 3\n")
    cost = CostModel(vertex_hit_ratio=0.5)
    tr = random_vertex_sample(g, 1000.0, cost, RngStream(9))
    assert tr.spent == 1000.0  # misses are still charged
    assert abs(tr.n_steps - 500) < 4 * math.sqrt(1000 * 0.25)


def test_random_edge_trace(tri_pendant):
    tr = random_edge_sample(tri_pendant, 100.0, DEFAULT_COST, RngStream(10))
    assert not tr.vertex_only
    assert tr.n_steps == 50  # default edge query costs 2
    for u, v in zip(tr.u.tolist(), tr.v.tolist()):
        assert tri_pendant.has_edge(u, v)


# -- start modes -------------------------------------------------------------------


def test_uniform_starts_cover_vertices(tri_pendant):
    gen = RngStream(11).generator()
    draws = StartMode.uniform().draw(tri_pendant, 8000, gen)
    counts = np.bincount(draws, minlength=4)
    for c in counts:
        assert abs(c - 2000) < 4 * math.sqrt(8000 * 0.25 * 0.75)


def test_degree_starts_follow_degree_law(tri_pendant):
    gen = RngStream(12).generator()
    draws = StartMode.degree_proportional().draw(tri_pendant, 8000, gen)
    counts = np.bincount(draws, minlength=4)
    for v, c in enumerate(counts.tolist()):
        p = tri_pendant.degree(v) / tri_pendant.vol_total
        assert abs(c - 8000 * p) < 4 * math.sqrt(8000 * p * (1 - p))


def test_explicit_start_validation(tri_pendant):
    gen = RngStream(13).generator()
    with pytest.raises(ValueError):
        StartMode.explicit([0, 9]).draw(tri_pendant, 2, gen)
    with pytest.raises(ValueError):
        StartMode.explicit([0]).draw(tri_pendant, 2, gen)


# -- stationarity of recorded edges ---------------------------------------------


def test_fs_edges_approach_uniformity(tri_pendant):
    # stationary FS samples directed closure slots uniformly; allow slack
    # for walk autocorrelation
    from frontier.graphs import _searchsorted_ragged

    g = tri_pendant
    tr = frontier_sampling(g, 2, StartMode.degree_proportional(),
                           10 ** 6, DEFAULT_COST, RngStream(14))
    # slot id: position of v inside u's sorted neighbor block
    slots = _searchsorted_ragged(g.indices, g.indptr[tr.u], g.indptr[tr.u + 1], tr.v)
    counts = np.bincount(slots, minlength=g.vol_total)
    freqs = counts / counts.sum()
    assert np.abs(freqs - 1 / 8).max() < 0.02 / 8


# -- determinism --------------------------------------------------------------------


def test_traces_reproduce_with_seed(tri_pendant):
    a = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 200.0,
                          DEFAULT_COST, RngStream(15))
    b = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 200.0,
                          DEFAULT_COST, RngStream(15))
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)
    c = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 200.0,
                          DEFAULT_COST, RngStream(16))
    assert not (np.array_equal(a.u, c.u) and np.array_equal(a.v, c.v))


def test_mrw_walkers_use_derived_streams(tri_pendant):
    # walker w of one run equals walker w of a larger-m run (same child stream)
    small = multiple_rw(tri_pendant, 2, StartMode.uniform(), 40.0,
                        DEFAULT_COST, RngStream(17))
    big = multiple_rw(tri_pendant, 4, StartMode.uniform(), 80.0,
                      DEFAULT_COST, RngStream(17))
    sm = small.v[small.walker == 0]
    bg = big.v[big.walker == 0]
    assert np.array_equal(sm, bg[:sm.size])


# -- burn-in ------------------------------------------------------------------------


def test_burn_in_drops_first_steps_per_walker(tri_pendant):
    tr = multiple_rw(tri_pendant, 3, StartMode.uniform(), 60.0,
                     DEFAULT_COST, RngStream(18))
    cut = discard_burn_in(tr, 4)
    assert cut.walker_steps().tolist() == [15, 15, 15]
    assert cut.meta["burn_in"] == 4
    # surviving records are the tail of each walker's sequence
    for w in range(3):
        assert np.array_equal(cut.v[cut.walker == w], tr.v[tr.walker == w][4:])
    assert cut.budget == tr.budget and cut.spent == tr.spent


def test_burn_in_zero_is_identity(tri_pendant):
    tr = single_rw(tri_pendant, StartMode.uniform(), 30.0, RngStream(19))
    assert discard_burn_in(tr, 0) is tr


def test_burn_in_must_leave_samples(tri_pendant):
    tr = single_rw(tri_pendant, StartMode.uniform(), 30.0, RngStream(19))
    with pytest.raises(ValueError):
        discard_burn_in(tr, 29)


def test_fs_burn_in_by_walker(tri_pendant):
    tr = frontier_sampling(tri_pendant, 2, StartMode.uniform(), 400.0,
                           DEFAULT_COST, RngStream(20))
    per = tr.walker_steps()
    cut = discard_burn_in(tr, 3)
    assert cut.walker_steps().tolist() == [int(per[0]) - 3, int(per[1]) - 3]


# -- trace CSV round trip --------------------------------------------------------------


@pytest.mark.parametrize("maker", [
    lambda g: frontier_sampling(g, 2, StartMode.uniform(), 50.0, DEFAULT_COST,
                                RngStream(21)),
    lambda g: single_rw(g, StartMode.uniform(), 50.0, RngStream(22)),
    lambda g: multiple_rw(g, 2, StartMode.uniform(), 50.0, DEFAULT_COST,
                          RngStream(23)),
    lambda g: distributed_fs(g, 2, 25.0, StartMode.uniform(), RngStream(24)),
    lambda g: random_vertex_sample(g, 50.0, DEFAULT_COST, RngStream(25)),
    lambda g: random_edge_sample(g, 50.0, DEFAULT_COST, RngStream(26)),
])
def test_trace_csv_round_trip(tri_pendant, maker):
    tr = maker(tri_pendant)
    buf = io.StringIO()
    write_trace_csv(tr, buf)
    back = read_trace_csv(io.StringIO(buf.getvalue()))
    assert back.method == tr.method
    assert back.m == tr.m
    assert back.budget == tr.budget
    assert back.spent == tr.spent
    assert back.graph_hash == tr.graph_hash
    assert np.array_equal(back.start_vertices, tr.start_vertices)
    assert np.array_equal(back.u, tr.u)
    assert np.array_equal(back.v, tr.v)
    assert np.array_equal(back.walker, tr.walker)
    assert np.array_equal(back.cost, tr.cost)
    if tr.time is not None:
        assert np.array_equal(back.time, tr.time)
    buf2 = io.StringIO()
    write_trace_csv(back, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_trace_arrays_are_frozen(tri_pendant):
    tr = single_rw(tri_pendant, StartMode.uniform(), 30.0, RngStream(27))
    with pytest.raises(ValueError):
        tr.v[0] = 0
