"""Monte Carlo measurement harness.

Runs repeated sampling experiments against exact oracle truths and
reports normalized errors:

* NMSE of a density estimate: root mean squared error over runs divided
  by the true value.
* CNMSE: the same statistic applied to the degree CCDF.

Also provides the closed-form error curves of independent vertex/edge
sampling, a final-edge convergence diagnostic, and a walker-occupancy
study for the multi-walker samplers.

Determinism: run r of method k draws from the derived stream
``(seed, k, r)`` and results are aggregated in run order, so reports are
byte-identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy import stats

from .errors import BudgetError, ConfigError, UndefinedEstimateError
from .estimators import (
    degree_density_from_edge_samples,
    degree_density_from_vertex_samples,
    estimate_assortativity,
    estimate_degree_density,
    estimate_edge_label_density,
    estimate_global_clustering,
    estimate_group_densities,
    vertex_density_from_vertex_samples,
    _ccdf_from_density,
)
from .graphs import Graph, LabelStore, generate_barabasi_albert, generate_joined_ba, load_graph, parse_vertex_labels
from .oracles import (
    CharacteristicTruth,
    compute_truth,
    stationary_occupancy_ratio,
    stationary_subset_occupancy,
)
from .rng import RngStream
from .samplers import (
    DEFAULT_COST,
    CostModel,
    StartMode,
    discard_burn_in,
    distributed_fs,
    frontier_sampling,
    multiple_rw,
    random_edge_sample,
    random_vertex_sample,
    single_rw,
)

__all__ = [
    "tv_distance",
    "nmse",
    "cnmse",
    "theoretical_nmse_vertex",
    "theoretical_nmse_edge",
    "MethodSpec",
    "TargetSpec",
    "ExperimentConfig",
    "resolve_budget",
    "ReportRow",
    "ErrorReport",
    "run_monte_carlo",
    "FinalEdgeDiagnostic",
    "convergence_diagnostic",
    "OccupancyStudy",
    "occupancy_study",
]

_METHOD_NAMES = ("rw", "mrw", "fs", "dfs", "random_vertex", "random_edge")
_EDGE_METHODS = ("rw", "mrw", "fs", "dfs", "random_edge")


# -- error metrics ---------------------------------------------------------


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance between two pmfs on a shared support."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("pmfs must share a support")
    return 0.5 * float(np.abs(p - q).sum())


def nmse(truth: dict, runs: Sequence[dict]) -> tuple[dict, list[str]]:
    """Per-label normalized RMSE over runs; zero-truth labels are omitted.

    A run that never observed a label contributes the estimate 0 for it.
    """
    if len(runs) < 1:
        raise ValueError("need at least one run")
    out: dict = {}
    warnings: list[str] = []
    for key in truth:
        t = truth[key]
        if t <= 0:
            warnings.append(f"label {key}: zero truth value, NMSE omitted")
            continue
        vals = np.asarray([r.get(key, 0.0) for r in runs], dtype=np.float64)
        out[key] = float(np.sqrt(np.mean((vals - t) ** 2)) / t)
    return out, warnings


def cnmse(truth_gamma: dict, runs_gamma: Sequence[dict]) -> tuple[dict, list[str]]:
    """NMSE applied to degree-CCDF estimates."""
    return nmse(truth_gamma, runs_gamma)


def theoretical_nmse_vertex(theta: dict, budget: int) -> dict:
    """Closed-form NMSE of independent uniform-vertex sampling:
    sqrt((1/theta_i - 1) / B)."""
    return {k: math.sqrt((1.0 / t - 1.0) / budget) for k, t in theta.items() if t > 0}


def theoretical_nmse_edge(theta: dict, avg_degree: float, budget: int) -> dict:
    """Closed-form NMSE of independent uniform-edge sampling: a degree-i
    vertex is hit with probability i*theta_i/d, so sqrt((d/(i*theta_i) - 1)/B)."""
    out = {}
    for k, t in theta.items():
        if t > 0 and k > 0:
            pi = k * t / avg_degree
            out[k] = math.sqrt((1.0 / pi - 1.0) / budget)
    return out


# -- experiment configuration -------------------------------------------------


def _check_keys(raw: dict, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


def _parse_start(raw, where: str) -> StartMode:
    if raw is None:
        return StartMode.uniform()
    if isinstance(raw, str):
        if raw == "uniform":
            return StartMode.uniform()
        if raw == "degree":
            return StartMode.degree_proportional()
        raise ConfigError(f"{where}: unknown start mode {raw!r}")
    if isinstance(raw, dict):
        _check_keys(raw, ("kind", "vertices"), where)
        if raw.get("kind") == "explicit":
            return StartMode.explicit(raw.get("vertices", ()))
        return _parse_start(raw.get("kind"), where)
    raise ConfigError(f"{where}: invalid start mode {raw!r}")


def _parse_cost(raw, where: str) -> CostModel:
    if raw is None:
        return DEFAULT_COST
    _check_keys(raw, ("walk_step_cost", "vertex_query_cost", "vertex_hit_ratio",
                      "edge_sample_cost", "edge_hit_ratio", "stochastic_starts"), where)
    try:
        return CostModel(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class MethodSpec:
    """One sampler configuration inside an experiment."""

    name: str
    m: int = 1
    start: StartMode = StartMode.uniform()
    cost: CostModel = DEFAULT_COST
    time_budget: float | None = None

    @classmethod
    def from_config(cls, raw: dict, where: str) -> "MethodSpec":
        _check_keys(raw, ("name", "m", "start", "cost", "time_budget"), where)
        name = raw.get("name")
        if name not in _METHOD_NAMES:
            raise ConfigError(f"{where}: unknown method {name!r}; choose from {_METHOD_NAMES}")
        m = int(raw.get("m", 1))
        if m < 1:
            raise ConfigError(f"{where}: m must be >= 1")
        spec = cls(name=name, m=m, start=_parse_start(raw.get("start"), where),
                   cost=_parse_cost(raw.get("cost"), where),
                   time_budget=raw.get("time_budget"))
        if name == "dfs" and spec.time_budget is None:
            raise ConfigError(f"{where}: dfs needs a time_budget")
        return spec

    @property
    def key(self) -> str:
        """Stable row label such as ``fs[m=100]`` or ``mrw[m=100,start=degree]``."""
        parts = []
        if self.m != 1:
            parts.append(f"m={self.m}")
        if self.start.kind != "uniform":
            parts.append(f"start={self.start.kind}")
        return self.name if not parts else f"{self.name}[{','.join(parts)}]"


@dataclass(frozen=True)
class TargetSpec:
    """Which characteristics an experiment estimates and scores."""

    ccdf: bool = False
    degree_density: tuple[int, ...] = ()
    labels: tuple[str, ...] = ()
    edge_labels: tuple[str, ...] = ()
    assortativity: bool = False
    clustering: bool = False

    @classmethod
    def from_config(cls, raw: dict) -> "TargetSpec":
        _check_keys(raw, ("ccdf", "degree_density", "labels", "edge_labels",
                          "assortativity", "clustering"), "targets")
        spec = cls(
            ccdf=bool(raw.get("ccdf", False)),
            degree_density=tuple(int(k) for k in raw.get("degree_density", ())),
            labels=tuple(raw.get("labels", ())),
            edge_labels=tuple(raw.get("edge_labels", ())),
            assortativity=bool(raw.get("assortativity", False)),
            clustering=bool(raw.get("clustering", False)),
        )
        if not (spec.ccdf or spec.degree_density or spec.labels or spec.edge_labels
                or spec.assortativity or spec.clustering):
            raise ConfigError("targets: nothing to estimate")
        return spec

    def oracle_targets(self) -> tuple[str, ...]:
        out = []
        if self.ccdf:
            out.append("ccdf")
        if self.degree_density:
            out.append("degree_density")
        if self.labels:
            out.append("labels")
        if self.edge_labels:
            out.append("edge_labels")
        if self.assortativity:
            out.append("assortativity")
        if self.clustering:
            out.append("clustering")
        return tuple(out)


def resolve_budget(raw, n_vertices: int) -> float:
    """Budgets are numbers or ``V/k`` strings (a fraction of the vertex count)."""
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        value = float(raw)
    elif isinstance(raw, str):
        text = raw.strip()
        if text.upper().startswith("V/"):
            try:
                div = int(text[2:])
            except ValueError:
                raise ConfigError(f"bad budget expression {raw!r}") from None
            if div < 1:
                raise ConfigError(f"bad budget expression {raw!r}")
            value = float(n_vertices // div)
        else:
            try:
                value = float(text)
            except ValueError:
                raise ConfigError(f"bad budget expression {raw!r}") from None
    else:
        raise ConfigError(f"bad budget value {raw!r}")
    if value <= 0:
        raise ConfigError(f"budget must resolve to a positive value, got {value}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    graph: dict
    methods: tuple[MethodSpec, ...]
    budget: "float | str"
    targets: TargetSpec
    runs: int = 10000
    burn_in: int = 0
    seed: int = 0
    ccdf_mode: str = "symmetric"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        _check_keys(raw, ("graph", "methods", "budget", "targets", "runs",
                          "burn_in", "seed", "ccdf_mode"), "config")
        for key in ("graph", "methods", "budget", "targets"):
            if key not in raw:
                raise ConfigError(f"config: missing required key {key!r}")
        graph_raw = dict(raw["graph"])
        kind = graph_raw.get("kind")
        if kind == "ba":
            _check_keys(graph_raw, ("kind", "n", "attach", "seed"), "graph")
        elif kind == "gab":
            _check_keys(graph_raw, ("kind", "n_each", "attach_a", "attach_b", "seed"), "graph")
        elif kind == "file":
            _check_keys(graph_raw, ("kind", "path", "labels_path"), "graph")
        else:
            raise ConfigError(f"graph: unknown kind {kind!r}")
        methods = tuple(MethodSpec.from_config(m, f"methods[{i}]")
                        for i, m in enumerate(raw["methods"]))
        if not methods:
            raise ConfigError("config: methods list is empty")
        targets = TargetSpec.from_config(dict(raw["targets"]))
        runs = int(raw.get("runs", 10000))
        if runs < 1:
            raise ConfigError("config: runs must be >= 1")
        burn_in = int(raw.get("burn_in", 0))
        if burn_in < 0:
            raise ConfigError("config: burn_in must be >= 0")
        mode = raw.get("ccdf_mode", "symmetric")
        if mode not in ("symmetric", "in_directed", "out_directed"):
            raise ConfigError(f"config: unknown ccdf_mode {mode!r}")
        vertex_only = [m.key for m in methods if m.name == "random_vertex"]
        if vertex_only and (targets.edge_labels or targets.assortativity
                            or targets.clustering):
            raise ConfigError(
                f"targets needing sampled edges are incompatible with {vertex_only}")
        return cls(graph=graph_raw, methods=methods, budget=raw["budget"],
                   targets=targets, runs=runs, burn_in=burn_in,
                   seed=int(raw.get("seed", 0)), ccdf_mode=mode)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw)

    def resolve_graph(self) -> tuple[Graph, LabelStore | None]:
        g = self.graph
        if g["kind"] == "ba":
            return generate_barabasi_albert(int(g["n"]), int(g["attach"]),
                                            int(g.get("seed", 0))), None
        if g["kind"] == "gab":
            return generate_joined_ba(int(g["n_each"]), int(g["attach_a"]),
                                      int(g["attach_b"]), int(g.get("seed", 0))), None
        with open(g["path"], "r", encoding="utf-8") as fh:
            graph = load_graph(fh)
        labels = None
        if g.get("labels_path"):
            with open(g["labels_path"], "r", encoding="utf-8") as fh:
                labels = parse_vertex_labels(fh, graph)
        return graph, labels


# -- single-run sampling + estimation ----------------------------------------


def _sample(graph: Graph, method: MethodSpec, budget: float, rng: RngStream):
    if method.name == "rw":
        return single_rw(graph, method.start, budget, rng, method.cost)
    if method.name == "mrw":
        return multiple_rw(graph, method.m, method.start, budget, method.cost, rng)
    if method.name == "fs":
        return frontier_sampling(graph, method.m, method.start, budget, method.cost, rng)
    if method.name == "dfs":
        return distributed_fs(graph, method.m, float(method.time_budget),
                              method.start, rng)
    if method.name == "random_vertex":
        return random_vertex_sample(graph, budget, method.cost, rng)
    if method.name == "random_edge":
        return random_edge_sample(graph, budget, method.cost, rng)
    raise ConfigError(f"unknown method {method.name!r}")


def _estimate_one_run(graph: Graph, labels: LabelStore | None, cfg: ExperimentConfig,
                      method: MethodSpec, budget: float, run_idx: int,
                      method_idx: int) -> dict:
    rng = RngStream(cfg.seed).child(method_idx, run_idx)
    trace = _sample(graph, method, budget, rng)
    if cfg.burn_in and method.name in ("rw", "mrw", "fs", "dfs"):
        trace = discard_burn_in(trace, cfg.burn_in)
    t = cfg.targets
    out: dict = {}
    if t.ccdf or t.degree_density:
        if method.name == "random_vertex":
            dens = degree_density_from_vertex_samples(trace, graph, cfg.ccdf_mode)
        elif method.name == "random_edge":
            dens = degree_density_from_edge_samples(trace, graph, cfg.ccdf_mode)
        else:
            dens = estimate_degree_density(trace, graph, cfg.ccdf_mode)
        if t.degree_density:
            out["theta_degree"] = {k: dens.values.get(k, 0.0) for k in t.degree_density}
        if t.ccdf:
            out["gamma"] = _ccdf_from_density(dens.values)
    if t.labels:
        if method.name == "random_vertex":
            vals = {}
            for name in t.labels:
                vals[name] = vertex_density_from_vertex_samples(
                    trace, labels, name).values[name]
            out["theta_label"] = vals
        else:
            group = estimate_group_densities(trace, graph, labels)
            out["theta_label"] = {name: group.values[name] for name in t.labels}
    if t.edge_labels:
        vals = {}
        for name in t.edge_labels:
            try:
                vals[name] = estimate_edge_label_density(trace, labels, name).values[name]
            except UndefinedEstimateError:
                vals[name] = None
        out["p_edge"] = vals
    if t.assortativity:
        try:
            out["r"] = estimate_assortativity(trace, graph).r_hat
        except UndefinedEstimateError:
            out["r"] = None
    if t.clustering:
        try:
            out["C"] = estimate_global_clustering(trace, graph).c_hat
        except UndefinedEstimateError:
            out["C"] = None
    return out


# worker context for forked processes: populated in the parent before the
# pool is created, inherited by fork, never mutated afterwards
_WORKER_CTX: dict = {}


def _worker_chunk(args) -> list:
    method_idx, run_indices = args
    graph = _WORKER_CTX["graph"]
    labels = _WORKER_CTX["labels"]
    cfg = _WORKER_CTX["config"]
    budget = _WORKER_CTX["budget"]
    method = cfg.methods[method_idx]
    return [(method_idx, i,
             _estimate_one_run(graph, labels, cfg, method, budget, i, method_idx))
            for i in run_indices]


# -- report -------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    method: str
    kind: str           # gamma | theta | p_edge | r | C
    label: str
    truth: float
    mean_estimate: float
    bias: float         # mean_estimate/truth - 1 (nan when truth == 0)
    nmse: float | None
    cnmse: float | None
    runs_used: int


@dataclass
class ErrorReport:
    metadata: dict
    rows: list[ReportRow]
    warnings: list[str] = field(default_factory=list)

    def to_csv(self, stream_or_path: "str | IO") -> None:
        def emit(fh):
            for k in sorted(self.metadata):
                fh.write(f"# {k}={self.metadata[k]}\n")
            for w in self.warnings:
                fh.write(f"# warning={w}\n")
            fh.write("method,kind,label,truth,mean_estimate,bias,nmse,cnmse\n")
            for r in self.rows:
                fh.write(
                    f"{r.method},{r.kind},{r.label},{_fmt(r.truth)},"
                    f"{_fmt(r.mean_estimate)},{_fmt(r.bias)},"
                    f"{_fmt(r.nmse)},{_fmt(r.cnmse)}\n")

        if isinstance(stream_or_path, str):
            with open(stream_or_path, "w", encoding="utf-8") as fh:
                emit(fh)
        else:
            emit(stream_or_path)

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "warnings": self.warnings,
            "rows": [vars(r) for r in self.rows],
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def rows_for(self, method_key: str, kind: str | None = None) -> list[ReportRow]:
        return [r for r in self.rows
                if r.method == method_key and (kind is None or r.kind == kind)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def _truth_cache_path(cache_dir: str, graph_hash: str, cfg: ExperimentConfig) -> str:
    spec = json.dumps({
        "targets": sorted(cfg.targets.oracle_targets()),
        "degree_density": list(cfg.targets.degree_density),
        "labels": list(cfg.targets.labels),
        "edge_labels": list(cfg.targets.edge_labels),
        "ccdf_mode": cfg.ccdf_mode,
    }, sort_keys=True)
    key = hashlib.sha256((graph_hash + spec).encode()).hexdigest()[:20]
    return os.path.join(cache_dir, f"truth-{key}.json")


def _load_truth(graph: Graph, labels: LabelStore | None, cfg: ExperimentConfig,
                cache_dir: str | None, warnings: list[str]) -> CharacteristicTruth:
    path = None
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        path = _truth_cache_path(cache_dir, graph.graph_hash, cfg)
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                cached = CharacteristicTruth.from_json(fh.read())
            if cached.graph_hash == graph.graph_hash:
                return cached
            warnings.append("truth cache hash mismatch; recomputed")
    truth = compute_truth(graph, labels, cfg.ccdf_mode, cfg.targets.oracle_targets())
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(truth.to_json())
    return truth


def _check_feasible(graph: Graph, method: MethodSpec, budget: float) -> None:
    c = method.cost
    start_c = 0.0 if method.start.kind == "explicit" else c.effective_start_cost
    if method.name == "rw":
        ok = budget - start_c >= c.walk_step_cost
    elif method.name == "mrw":
        ok = (budget / method.m - start_c) // c.walk_step_cost >= 1
    elif method.name == "fs":
        ok = budget - method.m * start_c >= c.walk_step_cost
    elif method.name == "dfs":
        ok = method.time_budget is not None and method.time_budget > 0
    elif method.name == "random_vertex":
        ok = budget >= c.vertex_query_cost / c.vertex_hit_ratio
    else:
        ok = budget >= c.edge_sample_cost / c.edge_hit_ratio
    if not ok:
        raise ConfigError(f"budget {budget} infeasible for method {method.key}")


def run_monte_carlo(config: ExperimentConfig, workers: int = 1,
                    truth_cache_dir: str | None = None,
                    graph: Graph | None = None,
                    labels: LabelStore | None = None) -> ErrorReport:
    """Execute the configured experiment and score it against exact truth.

    Per-run estimates are deterministic in (seed, method index, run
    index); the worker count only changes scheduling, never results.
    """
    if graph is None:
        graph, labels = config.resolve_graph()
    if (config.targets.labels or config.targets.edge_labels) and labels is None:
        raise ConfigError("label targets need a graph with labels")
    budget = resolve_budget(config.budget, graph.n_vertices)
    for method in config.methods:
        _check_feasible(graph, method, budget)

    warnings: list[str] = []
    truth = _load_truth(graph, labels, config, truth_cache_dir, warnings)

    results: list[list[dict | None]] = [[None] * config.runs for _ in config.methods]
    tasks = []
    chunk = max(1, config.runs // max(1, workers * 8))
    for mi in range(len(config.methods)):
        for lo in range(0, config.runs, chunk):
            tasks.append((mi, range(lo, min(lo + chunk, config.runs))))
    if workers > 1:
        _WORKER_CTX.update(graph=graph, labels=labels, config=config, budget=budget)
        try:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                for part in pool.map(_worker_chunk, tasks):
                    for mi, ri, est in part:
                        results[mi][ri] = est
        finally:
            _WORKER_CTX.clear()
    else:
        for mi, runs in tasks:
            method = config.methods[mi]
            for ri in runs:
                results[mi][ri] = _estimate_one_run(
                    graph, labels, config, method, budget, ri, mi)

    rows: list[ReportRow] = []
    t = config.targets
    for mi, method in enumerate(config.methods):
        runs = results[mi]
        if t.ccdf:
            gamma_runs = [r.get("gamma", {}) for r in runs]
            cn, warn = cnmse(truth.gamma, gamma_runs)
            warnings.extend(f"{method.key}/gamma: {w}" for w in warn)
            for l in sorted(truth.gamma):
                if truth.gamma[l] <= 0:
                    continue
                vals = np.asarray([g.get(l, 0.0) for g in gamma_runs])
                mean = float(vals.mean())
                rows.append(ReportRow(
                    method.key, "gamma", str(l), truth.gamma[l], mean,
                    mean / truth.gamma[l] - 1.0, None, cn[l], len(runs)))
        if t.degree_density:
            theta_runs = [r.get("theta_degree", {}) for r in runs]
            truth_theta = {k: truth.theta.get(f"degree={k}", 0.0)
                           for k in t.degree_density}
            nm, warn = nmse(truth_theta, theta_runs)
            warnings.extend(f"{method.key}/theta: {w}" for w in warn)
            for k in t.degree_density:
                if truth_theta[k] <= 0:
                    continue
                vals = np.asarray([r.get(k, 0.0) for r in theta_runs])
                mean = float(vals.mean())
                rows.append(ReportRow(
                    method.key, "theta", f"degree={k}", truth_theta[k], mean,
                    mean / truth_theta[k] - 1.0, nm[k], None, len(runs)))
        if t.labels:
            label_runs = [r.get("theta_label", {}) for r in runs]
            truth_labels = {name: truth.theta.get(name, 0.0) for name in t.labels}
            nm, warn = nmse(truth_labels, label_runs)
            warnings.extend(f"{method.key}/labels: {w}" for w in warn)
            for name in t.labels:
                if truth_labels[name] <= 0:
                    continue
                vals = np.asarray([r.get(name, 0.0) for r in label_runs])
                mean = float(vals.mean())
                rows.append(ReportRow(
                    method.key, "theta", name, truth_labels[name], mean,
                    mean / truth_labels[name] - 1.0, nm[name], None, len(runs)))
        if t.edge_labels:
            for name in t.edge_labels:
                truth_p = truth.p_edge.get(name, 0.0)
                vals = [r.get("p_edge", {}).get(name) for r in runs]
                valid = np.asarray([x for x in vals if x is not None])
                if valid.size < len(vals):
                    warnings.append(f"{method.key}/p_edge[{name}]: "
                                    f"{len(vals) - valid.size} runs undefined")
                if truth_p <= 0 or valid.size == 0:
                    warnings.append(f"{method.key}/p_edge[{name}]: omitted")
                    continue
                mean = float(valid.mean())
                rows.append(ReportRow(
                    method.key, "p_edge", name, truth_p, mean, mean / truth_p - 1.0,
                    float(np.sqrt(np.mean((valid - truth_p) ** 2)) / truth_p),
                    None, int(valid.size)))
        for kind, truth_val in (("r", truth.r), ("C", truth.clustering)):
            if (kind == "r" and not t.assortativity) or (kind == "C" and not t.clustering):
                continue
            vals = [r.get(kind) for r in runs]
            valid = np.asarray([x for x in vals if x is not None], dtype=np.float64)
            if valid.size < len(vals):
                warnings.append(f"{method.key}/{kind}: "
                                f"{len(vals) - valid.size} runs undefined")
            if valid.size == 0:
                warnings.append(f"{method.key}/{kind}: no valid runs")
                continue
            mean = float(valid.mean())
            if truth_val == 0:
                bias = math.nan
                nm_val = None
                warnings.append(f"{method.key}/{kind}: zero truth value, NMSE omitted")
            else:
                bias = mean / truth_val - 1.0
                nm_val = float(np.sqrt(np.mean((valid - truth_val) ** 2)) / abs(truth_val))
            rows.append(ReportRow(method.key, kind, kind, float(truth_val), mean,
                                  bias, nm_val, None, int(valid.size)))

    metadata = {
        "graph_hash": graph.graph_hash,
        "n_vertices": graph.n_vertices,
        "budget": repr(budget),
        "runs": config.runs,
        "burn_in": config.burn_in,
        "seed": config.seed,
        "ccdf_mode": config.ccdf_mode,
        "methods": ";".join(m.key for m in config.methods),
    }
    return ErrorReport(metadata, rows, warnings)


# -- convergence diagnostic ----------------------------------------------------


@dataclass(frozen=True)
class FinalEdgeDiagnostic:
    """How far the final sampled edge is from the uniform edge law.

    ``deviation`` is the worst relative under-sampling across directed
    edges, ``1 - p_min * |E|``, estimated split-sample: the first half
    of the runs only locates the most under-sampled closure slot, the
    second half re-estimates that slot's probability.  That keeps the
    estimate unbiased for the located slot (a raw minimum over counts
    would carry an extreme-value bias of roughly twice ``ci95`` at any
    run count), at the price that it may dip slightly below zero once
    the law is already uniform.
    """

    method: str
    m: int
    budget: float
    steps: int
    runs: int
    deviation: float
    ci95: float
    p_min: float
    edge_min: tuple[int, int]
    start: str = "uniform"
    counts: np.ndarray | None = None  # per closure slot, both halves, for law checks


def convergence_diagnostic(graph: Graph, method: str, budget: float, runs: int,
                           rng: RngStream, m: int = 1,
                           start: StartMode | None = None,
                           cost_model: CostModel = DEFAULT_COST,
                           block_size: int = 200_000) -> FinalEdgeDiagnostic:
    """Monte Carlo distribution of the final sampled edge.

    Exact computation would need the m-walker product chain, so the
    distribution is estimated from many short independent runs executed
    in vectorized blocks.  Starts default to uniform; explicit start
    lists are rejected because the diagnostic is about random-start
    transients.
    """
    if method not in ("rw", "mrw", "fs"):
        raise ConfigError(f"diagnostic supports rw, mrw, fs; got {method!r}")
    if start is None:
        start = StartMode.uniform()
    if start.kind == "explicit":
        raise ConfigError("diagnostic starts must be uniform or degree-proportional")
    if runs < 2:
        raise ValueError("split estimation needs at least 2 runs")
    c = cost_model.effective_start_cost
    step_cost = cost_model.walk_step_cost
    if method == "rw":
        steps = math.ceil((budget - c) / step_cost - 1e-12)
        sim_m = 1
    elif method == "mrw":
        steps = int((budget / m - c) // step_cost)
        sim_m = 1  # walkers are iid: the last walker's final edge is one walker's
    else:
        steps = math.ceil((budget - m * c) / step_cost - 1e-12)
        sim_m = m
    if steps < 1:
        raise BudgetError(f"budget {budget} leaves no steps for {method}")

    gen = rng.generator()
    deg = graph.deg
    indptr = graph.indptr
    indices = graph.indices
    sel_counts = np.zeros(graph.vol_total, dtype=np.int64)
    est_counts = np.zeros(graph.vol_total, dtype=np.int64)
    runs_sel = runs // 2
    done = 0
    while done < runs:
        # blocks never straddle the selection/estimation boundary
        if done < runs_sel:
            r = min(block_size, runs_sel - done)
        else:
            r = min(block_size, runs - done)
        if sim_m == 1:
            pos = start.draw(graph, r, gen)
            for _ in range(steps - 1):
                off = (gen.random(r) * deg[pos]).astype(np.int64)
                pos = indices[indptr[pos] + off]
            off = (gen.random(r) * deg[pos]).astype(np.int64)
            eid = indptr[pos] + off
        else:
            pos = start.draw(graph, r * sim_m, gen).reshape(r, sim_m)
            rows = np.arange(r)
            eid = np.empty(r, dtype=np.int64)
            for k in range(steps):
                degs = deg[pos]
                target = gen.random(r) * degs.sum(axis=1)
                j = np.minimum((degs.cumsum(axis=1) < target[:, None]).sum(axis=1),
                               sim_m - 1)
                cur = pos[rows, j]
                off = (gen.random(r) * deg[cur]).astype(np.int64)
                nxt_eid = indptr[cur] + off
                pos[rows, j] = indices[nxt_eid]
                if k == steps - 1:
                    eid = nxt_eid
        binc = np.bincount(eid, minlength=graph.vol_total)
        if done < runs_sel:
            sel_counts += binc
        else:
            est_counts += binc
        done += r

    amin = int(sel_counts.argmin())
    runs_est = runs - runs_sel
    c_est = int(est_counts[amin])
    p_min = c_est / runs_est
    vol = graph.vol_total
    deviation = 1.0 - vol * p_min
    p_tilde = max(p_min, (c_est + 0.5) / runs_est)
    ci95 = 1.96 * vol * math.sqrt(p_tilde * (1.0 - p_tilde) / runs_est)
    u_min = int(np.searchsorted(indptr, amin, side="right") - 1)
    return FinalEdgeDiagnostic(method, m, float(budget), steps, runs, deviation,
                               ci95, p_min, (u_min, int(indices[amin])), start.kind,
                               sel_counts + est_counts)


# -- occupancy study -------------------------------------------------------------


@dataclass(frozen=True)
class OccupancyStudy:
    """Empirical distribution of how many walkers sit inside a vertex subset."""

    method: str
    m: int
    steps: int
    runs: int
    pmf: np.ndarray
    mean: float
    expected_mean: float
    alpha_empirical: float
    alpha_exact: float
    tv_exact: float | None = None
    tv_binomial: float | None = None


def occupancy_study(graph: Graph, subset: Sequence[int], m: int, method: str = "fs",
                    steps: int = 10 ** 5, runs: int = 1,
                    rng: RngStream = RngStream(0),
                    start_mode: StartMode | None = None,
                    cost_model: CostModel = DEFAULT_COST) -> OccupancyStudy:
    """Tally subset occupancy of the walker ensemble after every step.

    Frontier sampling is compared against its stationary occupancy law
    and the binomial that m independent uniform walkers would give;
    independent walkers (mrw) are compared against the degree-share mean.
    """
    member = np.zeros(graph.n_vertices, dtype=np.int64)
    member[np.asarray(list(subset), dtype=np.int64)] = 1
    hist = np.zeros(m + 1, dtype=np.int64)
    c = cost_model.effective_start_cost
    if method == "fs":
        start = start_mode or StartMode.uniform()
        start_total = 0.0 if start.kind == "explicit" else m * c
        budget = start_total + steps * cost_model.walk_step_cost
        for run in range(runs):
            trace = frontier_sampling(graph, m, start, budget, cost_model,
                                      rng.child(run))
            k0 = int(member[trace.start_vertices].sum())
            occ = k0 + np.cumsum(member[trace.v] - member[trace.u])
            hist += np.bincount(occ, minlength=m + 1)
    elif method == "mrw":
        start = start_mode or StartMode.degree_proportional()
        per_walker = 0.0 if start.kind == "explicit" else c
        budget = m * (per_walker + steps * cost_model.walk_step_cost)
        for run in range(runs):
            trace = multiple_rw(graph, m, start, budget, cost_model, rng.child(run))
            counts = np.bincount(trace.walker, minlength=m)
            if not np.all(counts == counts[0]):
                raise ConfigError("occupancy study needs equal-length walks; "
                                  "use a deterministic cost model")
            vmat = trace.v.reshape(m, int(counts[0]))
            occ = member[vmat].sum(axis=0)
            hist += np.bincount(occ, minlength=m + 1)
    else:
        raise ConfigError(f"occupancy study supports fs and mrw; got {method!r}")

    pmf = hist / hist.sum()
    mean = float((np.arange(m + 1) * pmf).sum())
    n_a = int(member.sum())
    vol_share = float(graph.deg[member.astype(bool)].sum()) / graph.vol_total
    alpha_exact = stationary_occupancy_ratio(graph, subset)
    alpha_empirical = mean / (m * n_a / graph.n_vertices)
    if method == "fs":
        exact = stationary_subset_occupancy(graph, subset, m)
        binom = stats.binom.pmf(np.arange(m + 1), m, n_a / graph.n_vertices)
        return OccupancyStudy(method, m, steps, runs, pmf, mean,
                              float((np.arange(m + 1) * exact).sum()),
                              alpha_empirical, alpha_exact,
                              tv_distance(pmf, exact), tv_distance(pmf, binom))
    return OccupancyStudy(method, m, steps, runs, pmf, mean, m * vol_share,
                          alpha_empirical, alpha_exact)
