"""Connected components, degree reports, and the percolation proxy.

The root-reaches-boundary event stands in for {0 <-> infinity}: the root
component counts as percolating when it touches the outermost 5% of the
window. That surrogate, not a true limit, is what theta_estimate reports.
"""
from dataclasses import dataclass

import numpy as np

from . import _compiled, points, sampler
from .errors import ParameterError
from .stats import hill_tail_index, wilson_interval

_BOUNDARY_FRACTION = 0.95


@dataclass(frozen=True)
class ClusterReport:
    component_sizes: tuple
    largest: int
    largest_fraction: float
    root_component_size: int
    root_reaches_boundary: bool


@dataclass(frozen=True)
class DegreeReport:
    histogram: tuple
    mean_degree: float
    tail_index_estimate: float
    tau_target: float | None
    flagged: bool
    tail_points: int


@dataclass(frozen=True)
class ThetaReport:
    estimate: float
    ci_low: float
    ci_high: float
    replicas: int
    reached: int


def _positions(g: sampler.GraphSample):
    cfg = g.config
    if cfg is None:
        raise ParameterError("sample carries no configuration")
    offset = cfg.index_min
    edges = g.edges - offset
    return cfg, edges


def components(g: sampler.GraphSample) -> ClusterReport:
    """Exact connected components via union-find on the sampled edges."""
    cfg, pos_edges = _positions(g)
    n = g.n_vertices
    labels = _compiled.component_labels(np.int64(n), pos_edges)
    _, sizes = np.unique(labels, return_counts=True)
    order = np.argsort(sizes)[::-1]
    sizes = sizes[order]
    root_pos = -cfg.index_min
    root_label = labels[root_pos]
    root_size = int(np.sum(labels == root_label))
    locs = cfg.locations
    reach = bool(np.any(np.abs(locs[labels == root_label])
                        >= _BOUNDARY_FRACTION * cfg.window))
    return ClusterReport(
        component_sizes=tuple(int(s) for s in sizes),
        largest=int(sizes[0]),
        largest_fraction=float(sizes[0] / n),
        root_component_size=root_size,
        root_reaches_boundary=reach,
    )


def degrees(g: sampler.GraphSample) -> np.ndarray:
    cfg, pos_edges = _positions(g)
    d = np.zeros(g.n_vertices, dtype=np.int64)
    if len(pos_edges):
        np.add.at(d, pos_edges[:, 0], 1)
        np.add.at(d, pos_edges[:, 1], 1)
    return d


def degree_report(g: sampler.GraphSample, tail_fraction: float = 0.05) -> DegreeReport:
    """Degree histogram with a fixed-fraction Hill tail estimate.

    The Hill estimator runs on the top tail_fraction order statistics;
    fewer than 50 tail points, or a degenerate tail, flags the estimate
    as unreliable (the value is still reported).
    """
    if not 0 < tail_fraction <= 0.2:
        raise ParameterError("tail_fraction must lie in (0, 0.2]")
    d = degrees(g)
    n = len(d)
    mean_degree = float(2 * len(g.edges) / n)
    hist = np.bincount(d)
    k = max(1, int(tail_fraction * n))
    if k >= n:
        k = n - 1
    if k < 1:
        alpha, flagged = float("nan"), True
    else:
        alpha, flagged = hill_tail_index(d.astype(np.float64), k)
    gamma = g.params.kernel.gamma
    tau = 1.0 + 1.0 / gamma if gamma > 0 else None
    return DegreeReport(
        histogram=tuple(int(c) for c in hist),
        mean_degree=mean_degree,
        tail_index_estimate=alpha,
        tau_target=tau,
        flagged=bool(flagged),
        tail_points=int(k),
    )


def theta_estimate(m, pp, L: float, replicas: int, master_seed: int) -> ThetaReport:
    """Fraction of replicas whose root component reaches the window boundary.

    Finite-volume surrogate for the percolation probability; Wilson 95%
    interval across replicas.
    """
    if replicas < 1:
        raise ParameterError("need at least one replica")
    reached = 0
    for r in range(replicas):
        seed_r = _replica_seed(master_seed, r)
        cfg = points.sample_configuration(pp, L, seed_r)
        g = sampler.sample_edges_layered(cfg, m, seed_r)
        if components(g).root_reaches_boundary:
            reached += 1
    est, lo, hi = wilson_interval(reached, replicas)
    return ThetaReport(estimate=est, ci_low=lo, ci_high=hi,
                       replicas=replicas, reached=reached)


def _replica_seed(master_seed: int, r: int) -> int:
    from . import rng

    return rng.derive_seed(master_seed, r)


def csv_fields():
    """Column order shared by the sweep and finite-graph CSV writers."""
    return ("beta", "gamma", "delta", "kernel", "profile", "seed", "L_or_n",
            "n_vertices", "n_edges", "largest", "largest_fraction",
            "root_size", "reaches_boundary")


def report_row(g: sampler.GraphSample, rep: ClusterReport, L_or_n) -> dict:
    m = g.params
    return {
        "beta": repr(float(m.beta)),
        "gamma": repr(float(m.kernel.gamma)),
        "delta": repr(float(m.profile.delta)),
        "kernel": m.kernel.variant,
        "profile": m.profile.variant,
        "seed": str(int(g.seed)),
        "L_or_n": repr(L_or_n) if isinstance(L_or_n, float) else str(int(L_or_n)),
        "n_vertices": str(int(g.n_vertices)),
        "n_edges": str(int(len(g.edges))),
        "largest": str(int(rep.largest)),
        "largest_fraction": repr(float(rep.largest_fraction)),
        "root_size": str(int(rep.root_component_size)),
        "reaches_boundary": "1" if rep.root_reaches_boundary else "0",
    }
