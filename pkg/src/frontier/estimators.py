"""Estimators of graph characteristics from sample traces.

Walk traces sample directed edges; in the stationary regime each
directed edge of the symmetric closure is equally likely, so a step's
terminal vertex appears with probability proportional to its degree.
The vertex-level estimators therefore reweight each terminal by the
inverse of its degree and self-normalize by the mean inverse degree
(the running estimate of |V|/|E|).  Edge-level estimators are plain
frequencies over the usable steps.

Every estimator applied to a trace enumerating each directed edge
exactly once returns the population value exactly; tests pin that
identity at 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedEstimateError
from .graphs import Graph, LabelStore
from .oracles import joint_moments
from .samplers import SampleTrace

__all__ = [
    "DensityEstimate",
    "AssortativityEstimate",
    "ClusteringEstimate",
    "estimate_edge_label_density",
    "estimate_vertex_label_density",
    "estimate_group_densities",
    "estimate_degree_density",
    "estimate_degree_ccdf",
    "estimate_assortativity",
    "estimate_global_clustering",
    "vertex_density_from_vertex_samples",
    "degree_density_from_vertex_samples",
    "degree_density_from_edge_samples",
]


@dataclass(frozen=True)
class DensityEstimate:
    """Estimated densities keyed by label (or degree), with sample accounting.

    ``b_star`` counts the trace records that fed the estimate; ``s`` is
    the inverse-degree normalizer when one was used.
    """

    values: dict
    b_star: int
    s: float | None = None


@dataclass(frozen=True)
class AssortativityEstimate:
    r_hat: float
    joint: dict
    sigma_out: float
    sigma_in: float
    w_out: int
    w_in: int
    b_star: int


@dataclass(frozen=True)
class ClusteringEstimate:
    c_hat: float
    s: float
    b: int
    active_endpoints: int


def _require_edge_trace(trace: SampleTrace) -> None:
    if trace.n_steps == 0:
        raise UndefinedEstimateError("empty trace", code="empty_trace")
    if trace.vertex_only:
        raise UndefinedEstimateError(
            "vertex-only trace; this estimator needs sampled edges",
            code="vertex_only_trace")


def _inverse_degrees(trace: SampleTrace, graph: Graph) -> np.ndarray:
    return 1.0 / graph.deg[trace.v]


def estimate_edge_label_density(trace: SampleTrace, labels: LabelStore,
                                label: str) -> DensityEstimate:
    """Frequency of ``label`` among sampled edges that carry any label.

    Unlabeled edges are outside the labeled sub-population and do not
    count toward the effective sample size.
    """
    _require_edge_trace(trace)
    lid = labels.label_id(label)
    keys = (trace.u.astype(np.int64) << 32) | trace.v
    labeled_keys = []
    hit_keys = []
    for (eu, ev), ls in labels.labeled_edges():
        k = (int(eu) << 32) | int(ev)
        labeled_keys.append(k)
        if lid in ls:
            hit_keys.append(k)
    usable = np.isin(keys, np.asarray(labeled_keys, dtype=np.int64))
    b_star = int(usable.sum())
    if b_star == 0:
        raise UndefinedEstimateError("no sampled edge carries any label",
                                     code="no_labeled_samples")
    hits = int(np.isin(keys, np.asarray(hit_keys, dtype=np.int64)).sum())
    return DensityEstimate({label: hits / b_star}, b_star)


def _label_member_weight(trace: SampleTrace, graph: Graph, labels: LabelStore,
                         lid: int, counts: np.ndarray) -> float:
    total = 0.0
    for v, ls in labels.labeled_vertices():
        if lid in ls and counts[v]:
            total += counts[v] / graph.deg[v]
    return total


def estimate_vertex_label_density(trace: SampleTrace, graph: Graph,
                                  labels: LabelStore, label: str) -> DensityEstimate:
    """Inverse-degree-weighted frequency of ``label`` over terminal vertices."""
    _require_edge_trace(trace)
    lid = labels.label_id(label)
    inv = _inverse_degrees(trace, graph)
    denom = float(inv.sum())
    counts = np.bincount(trace.v, minlength=graph.n_vertices)
    num = _label_member_weight(trace, graph, labels, lid, counts)
    s = denom / trace.n_steps
    return DensityEstimate({label: num / denom}, trace.n_steps, s)


def estimate_group_densities(trace: SampleTrace, graph: Graph,
                             labels: LabelStore) -> DensityEstimate:
    """One pass over the trace estimating every vertex label's density.

    Labels that partition the sampled vertices get estimates summing to
    one exactly (the shared normalizer cancels).
    """
    _require_edge_trace(trace)
    inv = _inverse_degrees(trace, graph)
    denom = float(inv.sum())
    counts = np.bincount(trace.v, minlength=graph.n_vertices)
    acc = np.zeros(labels.n_labels)
    for v, ls in labels.labeled_vertices():
        if counts[v]:
            w = counts[v] / graph.deg[v]
            for lid in ls:
                acc[lid] += w
    values = {name: acc[lid] / denom for lid, name in enumerate(labels.label_names)}
    return DensityEstimate(values, trace.n_steps, denom / trace.n_steps)


def estimate_degree_density(trace: SampleTrace, graph: Graph,
                            mode: str = "symmetric") -> DensityEstimate:
    """Density of each observed degree class among terminal vertices.

    The class label is the chosen degree notion; the reweighting always
    uses the symmetric degree, which is what governs visit rates.
    """
    _require_edge_trace(trace)
    mode_degs = {"symmetric": graph.deg, "in_directed": graph.indeg_d,
                 "out_directed": graph.outdeg_d}[mode]
    inv = _inverse_degrees(trace, graph)
    denom = float(inv.sum())
    num = np.bincount(mode_degs[trace.v], weights=inv)
    values = {k: float(x) / denom for k, x in enumerate(num.tolist()) if x}
    return DensityEstimate(values, trace.n_steps, denom / trace.n_steps)


def _ccdf_from_density(theta: dict) -> dict[int, float]:
    if not theta:
        return {}
    top = max(theta)
    out: dict[int, float] = {}
    tail = 0.0
    for l in range(top, -1, -1):
        out[l] = tail  # fraction strictly above l
        tail += theta.get(l, 0.0)
    return dict(sorted(out.items()))


def estimate_degree_ccdf(trace: SampleTrace, graph: Graph,
                         mode: str = "symmetric") -> dict[int, float]:
    """Estimated fraction of vertices with degree > l, for l up to the
    largest degree observed in the trace."""
    return _ccdf_from_density(estimate_degree_density(trace, graph, mode).values)


def estimate_assortativity(trace: SampleTrace, graph: Graph) -> AssortativityEstimate:
    """Degree correlation from the sampled edges that exist in the
    directed edge set.

    Sampled (source out-degree, target in-degree) pairs form an empirical
    joint density truncated at the observed degree maxima; the estimate
    is its correlation coefficient.
    """
    _require_edge_trace(trace)
    mask = graph.directed_edge_mask(trace.u, trace.v)
    b_star = int(mask.sum())
    if b_star == 0:
        raise UndefinedEstimateError("no sampled edge lies in the directed edge set",
                                     code="no_directed_samples")
    x = graph.outdeg_d[trace.u[mask]].astype(np.int64)
    y = graph.indeg_d[trace.v[mask]].astype(np.int64)
    base = int(y.max()) + 1
    uniq, counts = np.unique(x * base + y, return_counts=True)
    joint = {(int(k // base), int(k % base)): int(c) / b_star
             for k, c in zip(uniq.tolist(), counts.tolist())}
    mean_out, mean_in, var_out, var_in, mean_prod = joint_moments(joint)
    if var_out <= 1e-15 or var_in <= 1e-15:
        raise UndefinedEstimateError(
            "degree correlation undefined on this sample: zero variance marginal",
            code="zero_degree_variance")
    sigma_out = float(np.sqrt(var_out))
    sigma_in = float(np.sqrt(var_in))
    r_hat = (mean_prod - mean_out * mean_in) / (sigma_out * sigma_in)
    return AssortativityEstimate(
        r_hat=float(r_hat), joint=joint, sigma_out=sigma_out, sigma_in=sigma_in,
        w_out=int(x.max()), w_in=int(y.max()), b_star=b_star)


def estimate_global_clustering(trace: SampleTrace, graph: Graph,
                               restrict_normalizer: bool = True) -> ClusteringEstimate:
    """Average local clustering from single-edge neighborhood overlaps.

    For a sampled edge ending at v with other endpoint u, the shared
    neighbor count f(v, u) is an unbiased probe of v's triangle count:
    averaged over v's edges it gives 2*triangles(v)/deg(v).  Each step
    contributes f / (2 * C(deg(v), 2)); dividing by the inverse-degree
    normalizer over degree->=2 endpoints turns the edge average into the
    vertex average restricted to vertices that can close triangles.
    ``restrict_normalizer=False`` normalizes over all endpoints instead
    (biased low by the degree-one share; kept for comparison).
    """
    _require_edge_trace(trace)
    deg_v = graph.deg[trace.v]
    active = deg_v >= 2
    n_active = int(active.sum())
    if restrict_normalizer and n_active == 0:
        raise UndefinedEstimateError(
            "no sampled endpoint has degree >= 2", code="no_active_vertices")

    # shared-neighbor counts are computed once per distinct sampled edge
    keys = (trace.u.astype(np.int64) << 32) | trace.v
    uniq, inverse = np.unique(keys, return_inverse=True)
    f_uniq = np.empty(uniq.size, dtype=np.float64)
    for i, k in enumerate(uniq.tolist()):
        eu, ev = k >> 32, k & 0xFFFFFFFF
        a = graph.neighbors(int(eu))
        b = graph.neighbors(int(ev))
        if a.size > b.size:
            a, b = b, a
        pos = np.searchsorted(b, a)
        ok = pos < b.size
        f_uniq[i] = np.count_nonzero(b[pos[ok]] == a[ok])
    f = f_uniq[inverse]

    terms = np.zeros(trace.n_steps)
    pairs = deg_v[active] * (deg_v[active] - 1) / 2.0
    terms[active] = f[active] / (2.0 * pairs)
    inv = 1.0 / deg_v
    denom = float(inv[active].sum()) if restrict_normalizer else float(inv.sum())
    if denom == 0.0:
        raise UndefinedEstimateError("normalizer is zero", code="no_active_vertices")
    return ClusteringEstimate(
        c_hat=float(terms.sum() / denom), s=denom / trace.n_steps,
        b=trace.n_steps, active_endpoints=n_active)


# -- estimators for independent (non-walk) samples ------------------------------


def vertex_density_from_vertex_samples(trace: SampleTrace, labels: LabelStore,
                                       label: str) -> DensityEstimate:
    """Plain frequency of ``label`` among uniformly sampled vertices."""
    if trace.n_steps == 0:
        raise UndefinedEstimateError("empty trace", code="empty_trace")
    hits = np.isin(trace.v, labels.vertices_with_label(label))
    return DensityEstimate({label: float(hits.mean())}, trace.n_steps)


def degree_density_from_vertex_samples(trace: SampleTrace, graph: Graph,
                                       mode: str = "symmetric") -> DensityEstimate:
    """Degree-class frequencies among uniformly sampled vertices."""
    if trace.n_steps == 0:
        raise UndefinedEstimateError("empty trace", code="empty_trace")
    mode_degs = {"symmetric": graph.deg, "in_directed": graph.indeg_d,
                 "out_directed": graph.outdeg_d}[mode]
    counts = np.bincount(mode_degs[trace.v])
    values = {k: c / trace.n_steps for k, c in enumerate(counts.tolist()) if c}
    return DensityEstimate(values, trace.n_steps)


def degree_density_from_edge_samples(trace: SampleTrace, graph: Graph,
                                     mode: str = "symmetric") -> DensityEstimate:
    """Degree densities from uniform edge samples, assuming the average
    degree is known.

    A uniform edge's source has degree i with probability i*theta_i/d,
    so the observed frequency is tilted by i/d; dividing it out recovers
    theta_i.
    """
    _require_edge_trace(trace)
    mode_degs = {"symmetric": graph.deg, "in_directed": graph.indeg_d,
                 "out_directed": graph.outdeg_d}[mode]
    d = graph.vol_total / graph.n_vertices
    counts = np.bincount(mode_degs[trace.u])
    values = {k: (c / trace.n_steps) * d / k
              for k, c in enumerate(counts.tolist()) if c and k > 0}
    return DensityEstimate(values, trace.n_steps)
