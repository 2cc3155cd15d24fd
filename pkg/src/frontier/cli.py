"""Command line interface.

Subcommands:

* ``generate``: synthesize a preferential-attachment graph (plain or
  two-community) and write a canonical edge list plus a JSON sidecar.
* ``sample``: run one sampler over a graph file and write the trace CSV.
* ``estimate``: turn a trace back into characteristic estimates (JSON).
* ``experiment``: run a configured Monte Carlo study and write the
  error report CSV.

All outputs are deterministic: same inputs and seeds give byte-identical
files. Exit codes: 0 success, 2 input/format/config problems, 3 domain
errors (estimate undefined, graph fails stationarity requirements),
1 unexpected failure. Errors are emitted as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import (
    BudgetError,
    ConfigError,
    GraphFormatError,
    StationarityError,
    UndefinedEstimateError,
)
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
from .graphs import (
    generate_barabasi_albert,
    generate_joined_ba,
    load_graph,
    parse_vertex_labels,
    write_edge_list,
)
from .harness import ExperimentConfig, resolve_budget, run_monte_carlo
from .rng import RngStream
from .samplers import (
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

__all__ = ["main"]


def _fail(code: int, error: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": error, "message": message},
                                sort_keys=True) + "\n")
    return code


def _check_out(path: str, force: bool) -> None:
    if path != "-" and os.path.exists(path) and not force:
        raise ConfigError(f"output file {path} exists; pass --force to overwrite")


def _load_graph_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return load_graph(fh)


def _resolve_vertices(graph, text: str) -> tuple[int, ...]:
    """Map comma-separated vertex ids from the input file to internal ids."""
    try:
        wanted = np.asarray([int(t) for t in text.split(",") if t.strip()],
                            dtype=np.int64)
    except ValueError:
        raise ConfigError(f"bad vertex list {text!r}") from None
    pos = np.searchsorted(graph.original_ids, wanted)
    pos = np.clip(pos, 0, graph.n_vertices - 1)
    missing = graph.original_ids[pos] != wanted
    if missing.any():
        raise ConfigError(f"unknown vertex id(s): {wanted[missing].tolist()}")
    return tuple(int(p) for p in pos)


# -- generate -------------------------------------------------------------------


def _cmd_generate(args) -> int:
    _check_out(args.out, args.force)
    if args.kind == "ba":
        graph = generate_barabasi_albert(args.n, args.attach, args.seed)
        params = {"kind": "ba", "n": args.n, "attach": args.attach, "seed": args.seed}
    else:
        graph = generate_joined_ba(args.n_each, args.attach_a, args.attach_b,
                                   args.seed)
        params = {"kind": "gab", "n_each": args.n_each, "attach_a": args.attach_a,
                  "attach_b": args.attach_b, "seed": args.seed}
    with open(args.out, "w", encoding="utf-8") as fh:
        write_edge_list(graph, fh)
    sidecar = dict(params, graph_hash=graph.graph_hash,
                   n_vertices=graph.n_vertices,
                   n_edges=graph.n_undirected_edges,
                   average_degree=graph.average_degree)
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    print(f"wrote {args.out} ({graph.n_vertices} vertices, "
          f"{graph.n_undirected_edges} edges)")
    return 0


# -- sample ---------------------------------------------------------------------


def _cost_from_args(args) -> CostModel:
    return CostModel(
        walk_step_cost=args.walk_step_cost,
        vertex_query_cost=args.vertex_query_cost,
        vertex_hit_ratio=args.vertex_hit_ratio,
        edge_sample_cost=args.edge_sample_cost,
        edge_hit_ratio=args.edge_hit_ratio,
        stochastic_starts=args.stochastic_starts,
    )


def _cmd_sample(args) -> int:
    _check_out(args.out, args.force)
    graph = _load_graph_file(args.graph)
    cost = _cost_from_args(args)
    rng = RngStream(args.seed)
    if args.start == "explicit":
        if not args.start_vertices:
            raise ConfigError("--start explicit needs --start-vertices")
        start = StartMode.explicit(_resolve_vertices(graph, args.start_vertices))
    elif args.start == "degree":
        start = StartMode.degree_proportional()
    else:
        start = StartMode.uniform()

    method = args.method
    if method == "dfs":
        if args.time_budget is None:
            raise ConfigError("dfs needs --time-budget")
        trace = distributed_fs(graph, args.m, args.time_budget, start, rng)
    else:
        if args.budget is None:
            raise ConfigError(f"{method} needs --budget")
        budget = resolve_budget(args.budget, graph.n_vertices)
        if method == "fs":
            trace = frontier_sampling(graph, args.m, start, budget, cost, rng)
        elif method == "rw":
            trace = single_rw(graph, start, budget, rng, cost)
        elif method == "mrw":
            trace = multiple_rw(graph, args.m, start, budget, cost, rng)
        elif method == "vertex":
            trace = random_vertex_sample(graph, budget, cost, rng)
        else:
            trace = random_edge_sample(graph, budget, cost, rng)

    if args.burn_in:
        trace = discard_burn_in(trace, args.burn_in)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_trace_csv(trace, fh)
    print(f"wrote {args.out} ({trace.n_steps} records, spent {trace.spent!r})")
    return 0


# -- estimate --------------------------------------------------------------------


def _parse_targets(text: str) -> dict:
    out = {"ccdf": False, "degree": [], "labels": [], "edge_labels": [],
           "assortativity": False, "clustering": False}
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "ccdf":
            out["ccdf"] = True
        elif token == "assortativity":
            out["assortativity"] = True
        elif token == "clustering":
            out["clustering"] = True
        elif token.startswith("degree="):
            try:
                out["degree"].append(int(token[7:]))
            except ValueError:
                raise ConfigError(f"bad target {token!r}") from None
        elif token.startswith("label="):
            out["labels"].append(token[6:])
        elif token.startswith("edge-label="):
            out["edge_labels"].append(token[11:])
        else:
            raise ConfigError(f"unknown target {token!r}")
    if not any((out["ccdf"], out["degree"], out["labels"], out["edge_labels"],
                out["assortativity"], out["clustering"])):
        raise ConfigError("no targets requested")
    return out


def _cmd_estimate(args) -> int:
    graph = _load_graph_file(args.graph)
    with open(args.trace, "r", encoding="utf-8", newline="") as fh:
        trace = read_trace_csv(fh)
    if trace.graph_hash and trace.graph_hash != graph.graph_hash:
        raise ConfigError(
            f"trace was sampled from a different graph "
            f"(trace {trace.graph_hash[:12]}..., graph {graph.graph_hash[:12]}...)")
    labels = None
    if args.labels_file:
        with open(args.labels_file, "r", encoding="utf-8") as fh:
            labels = parse_vertex_labels(fh, graph)
    targets = _parse_targets(args.targets)
    if args.burn_in and trace.method in ("rw", "mrw", "fs", "dfs"):
        trace = discard_burn_in(trace, args.burn_in)

    vertex_trace = trace.method == "random_vertex"
    result: dict = {"graph_hash": graph.graph_hash, "method": trace.method,
                    "n_records": trace.n_steps, "estimates": {}}
    est = result["estimates"]
    if targets["ccdf"] or targets["degree"]:
        if vertex_trace:
            dens = degree_density_from_vertex_samples(trace, graph, args.ccdf_mode)
        elif trace.method == "random_edge":
            dens = degree_density_from_edge_samples(trace, graph, args.ccdf_mode)
        else:
            dens = estimate_degree_density(trace, graph, args.ccdf_mode)
        if targets["ccdf"]:
            est["gamma"] = {str(k): v for k, v in
                            sorted(_ccdf_from_density(dens.values).items())}
        if targets["degree"]:
            est.setdefault("theta", {})
            for k in targets["degree"]:
                est["theta"][f"degree={k}"] = dens.values.get(k, 0.0)
    if targets["labels"]:
        if labels is None:
            raise ConfigError("label targets need --labels-file")
        est.setdefault("theta", {})
        for name in targets["labels"]:
            if vertex_trace:
                d = vertex_density_from_vertex_samples(trace, labels, name)
            else:
                d = estimate_group_densities(trace, graph, labels)
            est["theta"][name] = d.values[name]
    if targets["edge_labels"]:
        if labels is None:
            raise ConfigError("edge label targets need --labels-file")
        est["p_edge"] = {}
        for name in targets["edge_labels"]:
            est["p_edge"][name] = estimate_edge_label_density(
                trace, labels, name).values[name]
    if targets["assortativity"]:
        est["r"] = estimate_assortativity(trace, graph).r_hat
    if targets["clustering"]:
        est["C"] = estimate_global_clustering(trace, graph).c_hat

    payload = json.dumps(result, sort_keys=True, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(payload)
    else:
        _check_out(args.out, args.force)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
        print(f"wrote {args.out}")
    return 0


# -- experiment ------------------------------------------------------------------


def _cmd_experiment(args) -> int:
    _check_out(args.out, args.force)
    with open(args.config, "r", encoding="utf-8") as fh:
        config = ExperimentConfig.from_json(fh.read())
    report = run_monte_carlo(config, workers=args.workers,
                             truth_cache_dir=args.truth_cache)
    report.to_csv(args.out)
    print(f"wrote {args.out} ({len(report.rows)} rows, "
          f"{len(report.warnings)} warnings)")
    return 0


# -- parser ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontier",
        description="Graph sampling and characteristic estimation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a graph")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    ba = gen_sub.add_parser("ba", help="preferential attachment graph")
    ba.add_argument("--n", type=int, required=True)
    ba.add_argument("--attach", type=int, required=True)
    gab = gen_sub.add_parser("gab", help="two attachment graphs joined by one edge")
    gab.add_argument("--n-each", type=int, required=True)
    gab.add_argument("--attach-a", type=int, default=1)
    gab.add_argument("--attach-b", type=int, default=5)
    for p in (ba, gab):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
        p.add_argument("--force", action="store_true")
        p.set_defaults(func=_cmd_generate)

    smp = sub.add_parser("sample", help="run a sampler and write its trace")
    smp.add_argument("method", choices=("fs", "rw", "mrw", "dfs", "vertex", "edge"))
    smp.add_argument("--graph", required=True)
    smp.add_argument("--budget", help="number or V/k (fraction of vertex count)")
    smp.add_argument("--time-budget", type=float,
                     help="continuous-time horizon (dfs only)")
    smp.add_argument("--m", type=int, default=1, help="number of walkers")
    smp.add_argument("--seed", type=int, default=0)
    smp.add_argument("--start", choices=("uniform", "degree", "explicit"),
                     default="uniform")
    smp.add_argument("--start-vertices", help="comma separated, with --start explicit")
    smp.add_argument("--burn-in", type=int, default=0)
    smp.add_argument("--walk-step-cost", type=float, default=1.0)
    smp.add_argument("--vertex-query-cost", type=float, default=1.0)
    smp.add_argument("--vertex-hit-ratio", type=float, default=1.0)
    smp.add_argument("--edge-sample-cost", type=float, default=2.0)
    smp.add_argument("--edge-hit-ratio", type=float, default=1.0)
    smp.add_argument("--stochastic-starts", action="store_true")
    smp.add_argument("--out", required=True)
    smp.add_argument("--force", action="store_true")
    smp.set_defaults(func=_cmd_sample)

    est = sub.add_parser("estimate", help="estimate characteristics from a trace")
    est.add_argument("--graph", required=True)
    est.add_argument("--trace", required=True)
    est.add_argument("--targets", required=True,
                     help="comma list: ccdf, degree=K, label=NAME, "
                          "edge-label=NAME, assortativity, clustering")
    est.add_argument("--ccdf-mode",
                     choices=("symmetric", "in_directed", "out_directed"),
                     default="symmetric")
    est.add_argument("--burn-in", type=int, default=0)
    est.add_argument("--labels-file")
    est.add_argument("--out", default="-")
    est.add_argument("--force", action="store_true")
    est.set_defaults(func=_cmd_estimate)

    exp = sub.add_parser("experiment", help="run a Monte Carlo error study")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--workers", type=int, default=1)
    exp.add_argument("--truth-cache", help="directory for exact-truth JSON cache")
    exp.add_argument("--force", action="store_true")
    exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphFormatError as exc:
        return _fail(2, "graph_format", str(exc))
    except ConfigError as exc:
        return _fail(2, "config", str(exc))
    except BudgetError as exc:
        return _fail(2, "budget", str(exc))
    except UndefinedEstimateError as exc:
        return _fail(3, exc.code, str(exc))
    except StationarityError as exc:
        return _fail(3, "stationarity", str(exc))
    except OSError as exc:
        return _fail(2, "io", str(exc))


if __name__ == "__main__":
    sys.exit(main())
