"""Budgeted graph samplers: random vertices/edges and random-walk families.

All samplers charge a common cost model against a scalar budget and emit
an immutable :class:`SampleTrace`.  Walk samplers record one directed
edge per step; vertex sampling records vertices only (``u = -1``).

The headline method is frontier sampling: m walkers share one budget,
and each step moves the walker chosen with probability proportional to
its current degree, along a uniformly random incident edge.  That
coupling makes the walker tuple a single random walk on the m-fold
product graph, whose stationary law samples edges uniformly; the
estimators rely on exactly that property.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from .errors import BudgetError, GraphFormatError
from .graphs import Graph
from .rng import RngStream

__all__ = [
    "CostModel",
    "StartMode",
    "SampleTrace",
    "random_vertex_sample",
    "random_edge_sample",
    "single_rw",
    "multiple_rw",
    "frontier_sampling",
    "distributed_fs",
    "discard_burn_in",
    "write_trace_csv",
    "read_trace_csv",
]


@dataclass(frozen=True)
class CostModel:
    """Query costs and hit ratios shared by every sampler.

    A uniform or degree-proportional start is a vertex query that only
    succeeds with probability ``vertex_hit_ratio`` (think of drawing
    random ids from a sparse id space), so its effective price is
    ``vertex_query_cost / vertex_hit_ratio``.  By default that expected
    price is charged deterministically; ``stochastic_starts=True``
    instead draws the geometric number of attempts per start.
    """

    walk_step_cost: float = 1.0
    vertex_query_cost: float = 1.0
    vertex_hit_ratio: float = 1.0
    edge_sample_cost: float = 2.0
    edge_hit_ratio: float = 1.0
    stochastic_starts: bool = False

    def __post_init__(self) -> None:
        if self.walk_step_cost <= 0 or self.vertex_query_cost <= 0 \
                or self.edge_sample_cost <= 0:
            raise ValueError("costs must be positive")
        if not (0 < self.vertex_hit_ratio <= 1) or not (0 < self.edge_hit_ratio <= 1):
            raise ValueError("hit ratios must be in (0, 1]")

    @property
    def effective_start_cost(self) -> float:
        return self.vertex_query_cost / self.vertex_hit_ratio

    def start_costs(self, kind: str, m: int, gen: np.random.Generator) -> np.ndarray:
        """Per-walker start cost; explicit placements are free."""
        if kind == "explicit":
            return np.zeros(m)
        if self.stochastic_starts:
            attempts = gen.geometric(self.vertex_hit_ratio, size=m)
            return attempts * float(self.vertex_query_cost)
        return np.full(m, self.effective_start_cost)


DEFAULT_COST = CostModel()


@dataclass(frozen=True)
class StartMode:
    """Where walkers begin: uniform vertices, degree-proportional, or explicit."""

    kind: str
    vertices: tuple[int, ...] | None = None

    @staticmethod
    def uniform() -> "StartMode":
        return StartMode("uniform")

    @staticmethod
    def degree_proportional() -> "StartMode":
        return StartMode("degree")

    @staticmethod
    def explicit(vertices) -> "StartMode":
        return StartMode("explicit", tuple(int(v) for v in vertices))

    def draw(self, graph: Graph, m: int, gen: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            # with replacement: walkers may share a start vertex
            return gen.integers(0, graph.n_vertices, size=m)
        if self.kind == "degree":
            # landing on a uniform directed edge's source is the degree law
            t = gen.integers(0, graph.vol_total, size=m)
            return np.searchsorted(graph.indptr, t, side="right") - 1
        if self.kind == "explicit":
            if self.vertices is None or len(self.vertices) != m:
                raise ValueError(f"explicit start needs exactly {m} vertices")
            arr = np.asarray(self.vertices, dtype=np.int64)
            if arr.min() < 0 or arr.max() >= graph.n_vertices:
                raise ValueError("explicit start vertex out of range")
            return arr
        raise ValueError(f"unknown start mode {self.kind!r}")


@dataclass(frozen=True)
class SampleTrace:
    """Ordered sampler output plus its budget accounting.

    ``u``/``v`` hold the sampled directed edges (``u = -1`` throughout
    for vertex-only samples), ``walker`` tags the walker that moved, and
    ``cost`` is the per-record charge.  ``spent`` additionally includes
    start costs and missed queries, so ``spent >= cost.sum()``.
    Arrays are read-only; derived traces are new objects.
    """

    method: str
    m: int
    budget: float
    spent: float
    start_vertices: np.ndarray
    u: np.ndarray
    v: np.ndarray
    walker: np.ndarray
    cost: np.ndarray
    time: np.ndarray | None = None
    graph_hash: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for arr in (self.start_vertices, self.u, self.v, self.walker, self.cost, self.time):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_steps(self) -> int:
        return int(self.v.size)

    @property
    def vertex_only(self) -> bool:
        return bool(self.u.size) and int(self.u[0]) < 0

    def walker_steps(self) -> np.ndarray:
        """Number of recorded steps per walker id."""
        return np.bincount(self.walker, minlength=self.m)


def _finish(arrs, **kw) -> SampleTrace:
    u, v, walker, cost = arrs
    return SampleTrace(
        u=np.asarray(u, dtype=np.int64), v=np.asarray(v, dtype=np.int64),
        walker=np.asarray(walker, dtype=np.int32), cost=np.asarray(cost, dtype=np.float64),
        **kw)


# -- independent sampling ----------------------------------------------------


def random_vertex_sample(graph: Graph, budget: float, cost_model: CostModel = DEFAULT_COST,
                         rng: RngStream = RngStream(0)) -> SampleTrace:
    """Uniform vertex queries under the budget; misses cost but record nothing.

    Each query costs ``vertex_query_cost`` and lands on a valid vertex
    with probability ``vertex_hit_ratio``.
    """
    c = cost_model.vertex_query_cost
    if budget < c / cost_model.vertex_hit_ratio:
        raise BudgetError("budget below the expected cost of one valid vertex sample")
    queries = int(budget // c)
    gen = rng.generator()
    drawn = gen.integers(0, graph.n_vertices, size=queries)
    hit = gen.random(queries) < cost_model.vertex_hit_ratio
    v = drawn[hit]
    n = v.size
    return _finish(
        (np.full(n, -1), v, np.zeros(n), np.full(n, float(c))),
        method="random_vertex", m=1, budget=float(budget), spent=queries * float(c),
        start_vertices=np.empty(0, dtype=np.int64), graph_hash=graph.graph_hash)


def random_edge_sample(graph: Graph, budget: float, cost_model: CostModel = DEFAULT_COST,
                       rng: RngStream = RngStream(0)) -> SampleTrace:
    """Uniform directed-edge queries from the symmetric closure."""
    c = cost_model.edge_sample_cost
    if budget < c / cost_model.edge_hit_ratio:
        raise BudgetError("budget below the expected cost of one valid edge sample")
    queries = int(budget // c)
    gen = rng.generator()
    t = gen.integers(0, graph.vol_total, size=queries)
    hit = gen.random(queries) < cost_model.edge_hit_ratio
    t = t[hit]
    u = np.searchsorted(graph.indptr, t, side="right") - 1
    v = graph.indices[t]
    n = v.size
    return _finish(
        (u, v, np.zeros(n), np.full(n, float(c))),
        method="random_edge", m=1, budget=float(budget), spent=queries * float(c),
        start_vertices=np.empty(0, dtype=np.int64), graph_hash=graph.graph_hash)


# -- walk cores --------------------------------------------------------------


def _walk_path(graph: Graph, start: int, n_steps: int, gen: np.random.Generator) -> np.ndarray:
    """Vertex path of a simple random walk, length n_steps + 1."""
    ip, ix = graph.adjacency_lists
    r = gen.random(n_steps).tolist()
    cur = int(start)
    path = [cur]
    append = path.append
    for i in range(n_steps):
        a = ip[cur]
        cur = ix[a + int(r[i] * (ip[cur + 1] - a))]
        append(cur)
    return np.asarray(path, dtype=np.int64)


def _steps_from(budget: float, fixed_cost: float, step_cost: float, label: str) -> int:
    # run until accumulated steps reach the post-start budget, so the last
    # step may cross a fractional boundary (ceil)
    steps = math.ceil((budget - fixed_cost) / step_cost - 1e-12)
    if steps < 1:
        raise BudgetError(f"budget {budget} leaves no steps for {label}")
    return steps


def single_rw(graph: Graph, start_mode: StartMode = StartMode.uniform(),
              budget: float = 1000, rng: RngStream = RngStream(0),
              cost_model: CostModel = DEFAULT_COST) -> SampleTrace:
    """One random walker spending the whole budget on steps."""
    gen = rng.generator()
    start_cost = float(cost_model.start_costs(start_mode.kind, 1, gen)[0])
    start = int(start_mode.draw(graph, 1, gen)[0])
    steps = _steps_from(budget, start_cost, cost_model.walk_step_cost, "single_rw")
    path = _walk_path(graph, start, steps, gen)
    return _finish(
        (path[:-1], path[1:], np.zeros(steps), np.full(steps, cost_model.walk_step_cost)),
        method="rw", m=1, budget=float(budget),
        spent=start_cost + steps * cost_model.walk_step_cost,
        start_vertices=np.asarray([start], dtype=np.int64), graph_hash=graph.graph_hash,
        meta={"start_cost_total": start_cost})


def multiple_rw(graph: Graph, m: int, start_mode: StartMode = StartMode.uniform(),
                budget: float = 1000, cost_model: CostModel = DEFAULT_COST,
                rng: RngStream = RngStream(0)) -> SampleTrace:
    """m independent walkers, each granted an equal share of the budget.

    Walker w draws from the derived stream ``rng.child(w)``; the trace is
    walker-major.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    share = budget / m
    us, vs, ws, start_list, start_costs = [], [], [], [], []
    for w in range(m):
        gen = rng.child(w).generator()
        sc = float(cost_model.start_costs(start_mode.kind, 1, gen)[0])
        if start_mode.kind == "explicit":
            if start_mode.vertices is None or len(start_mode.vertices) != m:
                raise ValueError(f"explicit start needs exactly {m} vertices")
            start = int(start_mode.vertices[w])
        else:
            start = int(start_mode.draw(graph, 1, gen)[0])
        steps = int((share - sc) // cost_model.walk_step_cost)
        if steps < 1:
            raise BudgetError(f"budget share {share} leaves no steps for walker {w}")
        path = _walk_path(graph, start, steps, gen)
        us.append(path[:-1])
        vs.append(path[1:])
        ws.append(np.full(steps, w, dtype=np.int32))
        start_list.append(start)
        start_costs.append(sc)
    u = np.concatenate(us)
    cost = np.full(u.size, cost_model.walk_step_cost)
    return _finish(
        (u, np.concatenate(vs), np.concatenate(ws), cost),
        method="mrw", m=m, budget=float(budget),
        spent=float(sum(start_costs)) + u.size * cost_model.walk_step_cost,
        start_vertices=np.asarray(start_list, dtype=np.int64), graph_hash=graph.graph_hash,
        meta={"start_cost_total": float(sum(start_costs))})


def frontier_sampling(graph: Graph, m: int, start_mode: StartMode = StartMode.uniform(),
                      budget: float = 1000, cost_model: CostModel = DEFAULT_COST,
                      rng: RngStream = RngStream(0)) -> SampleTrace:
    """m coupled walkers sharing one budget.

    Per step: pick a walker with probability proportional to its current
    vertex degree, move it along a uniform incident edge, record that
    edge.  Initialization charges one vertex query per walker (unless
    placed explicitly); the walk then runs until the charged steps cover
    the remaining budget.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    gen = rng.generator()
    start_cost = float(cost_model.start_costs(start_mode.kind, m, gen).sum())
    starts = start_mode.draw(graph, m, gen)
    steps = _steps_from(budget, start_cost, cost_model.walk_step_cost, "frontier_sampling")

    ip, ix = graph.adjacency_lists
    pos = [int(x) for x in starts]
    degs = graph.deg[starts].astype(np.float64)
    r1 = gen.random(steps).tolist()
    r2 = gen.random(steps).tolist()
    u = np.empty(steps, dtype=np.int64)
    v = np.empty(steps, dtype=np.int64)
    wk = np.empty(steps, dtype=np.int32)
    for i in range(steps):
        cum = degs.cumsum()
        j = int(np.searchsorted(cum, r1[i] * cum[-1], side="right"))
        if j >= m:
            j = m - 1
        cur = pos[j]
        a = ip[cur]
        nxt = ix[a + int(r2[i] * (ip[cur + 1] - a))]
        u[i] = cur
        v[i] = nxt
        wk[i] = j
        pos[j] = nxt
        degs[j] = ip[nxt + 1] - ip[nxt]
    return _finish(
        (u, v, wk, np.full(steps, cost_model.walk_step_cost)),
        method="fs", m=m, budget=float(budget),
        spent=start_cost + steps * cost_model.walk_step_cost,
        start_vertices=starts.astype(np.int64), graph_hash=graph.graph_hash,
        meta={"start_cost_total": start_cost})


def distributed_fs(graph: Graph, m: int, time_budget: float,
                   start_mode: StartMode = StartMode.uniform(),
                   rng: RngStream = RngStream(0)) -> SampleTrace:
    """m independent continuous-time walkers; no coordination required.

    Each walker holds at vertex v for an exponential time with rate
    deg(v), then jumps along a uniform incident edge.  Because the
    minimum of the walkers' clocks selects a walker with probability
    proportional to its degree, the merged jump sequence reproduces the
    frontier-sampling step law without any shared state.  Edges are
    recorded in global event-time order until the time budget runs out;
    exact ties (never seen with float clocks) would fall to walker id.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if time_budget <= 0:
        raise BudgetError("time budget must be positive")
    gens = [rng.child(w).generator() for w in range(m)]
    starts = np.empty(m, dtype=np.int64)
    for w in range(m):
        if start_mode.kind == "explicit":
            if start_mode.vertices is None or len(start_mode.vertices) != m:
                raise ValueError(f"explicit start needs exactly {m} vertices")
            starts[w] = start_mode.vertices[w]
        else:
            starts[w] = int(start_mode.draw(graph, 1, gens[w])[0])
    ip, ix = graph.adjacency_lists
    pos = starts.tolist()
    heap = []
    for w in range(m):
        rate = ip[pos[w] + 1] - ip[pos[w]]
        heapq.heappush(heap, (gens[w].exponential(1.0 / rate), w))
    us, vs, ws, ts = [], [], [], []
    while heap:
        t, w = heapq.heappop(heap)
        if t > time_budget:
            break
        cur = pos[w]
        a = ip[cur]
        deg = ip[cur + 1] - a
        nxt = ix[a + int(gens[w].random() * deg)]
        us.append(cur)
        vs.append(nxt)
        ws.append(w)
        ts.append(t)
        pos[w] = nxt
        rate = ip[nxt + 1] - ip[nxt]
        heapq.heappush(heap, (t + gens[w].exponential(1.0 / rate), w))
    times = np.asarray(ts, dtype=np.float64)
    cost = np.diff(np.concatenate([[0.0], times]))
    trace = _finish(
        (us, vs, ws, cost),
        method="dfs", m=m, budget=float(time_budget),
        spent=float(times[-1]) if times.size else 0.0,
        start_vertices=starts, graph_hash=graph.graph_hash, time=times)
    return trace


def discard_burn_in(trace: SampleTrace, w: int) -> SampleTrace:
    """Drop each walker's first ``w`` recorded steps; budget metadata stays."""
    if w < 0:
        raise ValueError("burn-in must be non-negative")
    if w == 0:
        return trace
    per_walker = trace.walker_steps()
    active = per_walker[np.unique(trace.walker)]
    if w >= int(active.min()):
        raise ValueError(f"burn-in {w} >= steps of some walker (min {int(active.min())})")
    order = np.argsort(trace.walker, kind="stable")
    sorted_w = trace.walker[order]
    group_start = np.flatnonzero(np.r_[True, sorted_w[1:] != sorted_w[:-1]])
    counts = np.diff(np.r_[group_start, sorted_w.size])
    rank_sorted = np.arange(sorted_w.size) - np.repeat(group_start, counts)
    rank = np.empty_like(rank_sorted)
    rank[order] = rank_sorted
    keep = rank >= w
    meta = dict(trace.meta)
    meta["burn_in"] = w
    return replace(
        trace,
        u=trace.u[keep].copy(), v=trace.v[keep].copy(),
        walker=trace.walker[keep].copy(), cost=trace.cost[keep].copy(),
        time=None if trace.time is None else trace.time[keep].copy(),
        meta=meta)


# -- trace serialization -------------------------------------------------------


def write_trace_csv(trace: SampleTrace, path_or_stream: "str | IO") -> None:
    """CSV with ``# key=value`` header comments, then step records."""

    def emit(fh) -> None:
        fh.write(f"# method={trace.method}\n")
        fh.write(f"# m={trace.m}\n")
        fh.write(f"# budget={trace.budget!r}\n")
        fh.write(f"# spent={trace.spent!r}\n")
        if trace.graph_hash:
            fh.write(f"# graph_hash={trace.graph_hash}\n")
        fh.write("# start_vertices=%s\n" % ",".join(map(str, trace.start_vertices.tolist())))
        for k in sorted(trace.meta):
            fh.write(f"# {k}={trace.meta[k]!r}\n")
        cols = "step,walker,u,v,cost" + (",time" if trace.time is not None else "")
        fh.write(cols + "\n")
        walker = trace.walker.tolist()
        u = trace.u.tolist()
        v = trace.v.tolist()
        cost = trace.cost.tolist()
        time = trace.time.tolist() if trace.time is not None else None
        for i in range(trace.n_steps):
            row = f"{i + 1},{walker[i]},{u[i]},{v[i]},{cost[i]!r}"
            if time is not None:
                row += f",{time[i]!r}"
            fh.write(row + "\n")

    if isinstance(path_or_stream, str):
        with open(path_or_stream, "w", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(path_or_stream)


def read_trace_csv(source: "str | IO") -> SampleTrace:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    meta: dict[str, str] = {}
    rows: list[str] = []
    header: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, _, val = body.partition("=")
                meta[k.strip()] = val.strip()
            continue
        if header is None:
            header = line
            continue
        rows.append(line)
    if header is None:
        raise GraphFormatError("trace has no column header")
    cols = header.split(",")
    has_time = "time" in cols
    n = len(rows)
    u = np.empty(n, dtype=np.int64)
    v = np.empty(n, dtype=np.int64)
    walker = np.empty(n, dtype=np.int32)
    cost = np.empty(n, dtype=np.float64)
    time = np.empty(n, dtype=np.float64) if has_time else None
    for i, line in enumerate(rows):
        parts = line.split(",")
        if len(parts) != len(cols):
            raise GraphFormatError(f"trace row {i + 1} has {len(parts)} fields, "
                                   f"expected {len(cols)}")
        walker[i] = int(parts[1])
        u[i] = int(parts[2])
        v[i] = int(parts[3])
        cost[i] = float(parts[4])
        if has_time:
            time[i] = float(parts[5])
    starts = meta.pop("start_vertices", "")
    start_vertices = np.asarray([int(x) for x in starts.split(",") if x], dtype=np.int64)
    known = {k: meta.pop(k) for k in ("method", "m", "budget", "spent", "graph_hash")
             if k in meta}
    extra = {k: _parse_meta_value(val) for k, val in meta.items()}
    return SampleTrace(
        method=known.get("method", "unknown"), m=int(known.get("m", 1)),
        budget=float(known.get("budget", "nan")), spent=float(known.get("spent", "nan")),
        start_vertices=start_vertices, u=u, v=v, walker=walker, cost=cost, time=time,
        graph_hash=known.get("graph_hash"), meta=extra)


def _parse_meta_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if text and text[0] in "'\"" and text[-1] == text[0]:
        return text[1:-1]
    return text
