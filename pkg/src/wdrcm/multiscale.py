"""Origin crossings, overlapping blocks, goodness, and mark regularity.

These diagnostics measure proof-scaffolding quantities on finite samples:
stagewise crossing probabilities, the density of bad blocks, and the two
mark-regularity predicates. They report; asymptotic guarantees about these
objects are out of scope at desk scale.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _compiled, points, sampler
from .errors import DomainError, ParameterError
from .stats import wilson_interval

_STAGE_CAP = 22
_FLOAT_GUARD = 1e-9


@dataclass(frozen=True)
class ScaleSchedule:
    """Scale ladder K_n = (n!)^3 K^n with its spacing and density constants."""

    K: int
    a1: float = 1.0
    a2: float = 1.0
    mu: float = 0.25
    theta: float = 0.75
    theta_star: float = 0.8

    def __post_init__(self):
        if self.K < 2:
            raise ParameterError("base scale K must be at least 2")
        if not (self.a1 > 0 and self.a2 > 0):
            raise ParameterError("spacing constants must be positive")
        if not 0 < self.mu < 0.5:
            raise ParameterError("mu must lie in (0, 1/2)")
        if not 0 < self.theta < 1:
            raise ParameterError("theta must lie in (0, 1)")
        if not 0.75 < self.theta_star < 1:
            raise ParameterError("theta_star must lie in (3/4, 1)")

    def K_n(self, n: int) -> int:
        if n < 1:
            raise ParameterError("scale index must be at least 1")
        return math.factorial(n) ** 3 * self.K**n

    def C_n(self, n: int) -> int:
        if n < 1:
            raise ParameterError("scale index must be at least 1")
        return n**3 * self.K


@dataclass(frozen=True)
class CrossingReport:
    k_values: tuple
    chi_freq: tuple
    ci_low: tuple
    ci_high: tuple
    no_crossing_freq: float
    replicas: int


@dataclass(frozen=True)
class BlockRow:
    i: int
    index_lo: int
    index_hi: int
    largest: int
    is_good: bool


@dataclass(frozen=True)
class BlockReport:
    scale: int
    theta: float
    rows: tuple
    bad_fraction: float
    empirical_p_bad: float | None = None
    p_bad_ci: tuple | None = None
    replicas: int | None = None


@dataclass(frozen=True)
class Block:
    i: int
    index_lo: int
    index_hi: int


def _stage_sets(k: int):
    # left-left, left, right, right-right index intervals at stage k
    return ((-(2 ** (k + 1)), -(2**k) - 1), (-(2**k), -1),
            (0, 2**k - 1), (2**k, 2 ** (k + 1) - 1))


def crossing_stage_indicator(g: sampler.GraphSample, k: int) -> bool:
    """Stage-k origin crossing, straight from the stage sets.

    Stage 1 joins the whole left range to the whole right range; later
    stages only count pairs with at least one endpoint in the outer half,
    since inner-inner pairs were already considered at a smaller scale.
    """
    if k < 1:
        raise ParameterError("stage must be at least 1")
    cfg = g.config
    cfg.require_index(-(2 ** (k + 1)))
    cfg.require_index(2 ** (k + 1) - 1)
    if len(g.edges) == 0:
        return False
    (ll_lo, ll_hi), (l_lo, l_hi), (r_lo, r_hi), (rr_lo, rr_hi) = _stage_sets(k)
    i = g.edges[:, 0]
    j = g.edges[:, 1]
    in_ll = (i >= ll_lo) & (i <= ll_hi)
    in_l = (i >= l_lo) & (i <= l_hi)
    in_r = (j >= r_lo) & (j <= r_hi)
    in_rr = (j >= rr_lo) & (j <= rr_hi)
    if k == 1:
        return bool(np.any((in_ll | in_l) & (in_r | in_rr)))
    return bool(np.any((in_ll & (in_r | in_rr)) | (in_l & in_rr)))


def edge_stages(i, j):
    """Unique crossing stage of each left-right edge (i < 0 <= j).

    The stage is max(A, B, 1) where A is the dyadic level of the left
    endpoint's outer membership and B the right endpoint's; every
    crossing edge is counted at exactly one stage.
    """
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    if np.any(i >= 0) or np.any(j < 0):
        raise ParameterError("edge_stages expects i < 0 <= j")
    a = np.full(len(i), -1, dtype=np.int64)
    big = -i >= 2
    a[big] = np.ceil(np.log2((-i[big]).astype(np.float64))).astype(np.int64) - 1
    b = np.full(len(j), -1, dtype=np.int64)
    pos = j >= 1
    b[pos] = np.floor(np.log2(j[pos].astype(np.float64))).astype(np.int64)
    return np.maximum(np.maximum(a, b), 1)


def _counted_configuration(pp: points.PointProcessSpec, n_side: int, seed: int):
    if pp.kind == "poisson":
        return points.sample_poisson_palm_counted(pp.intensity, n_side,
                                                  max(1, n_side - 1), seed)
    if pp.kind == "deterministic-lattice":
        return points.sample_deterministic_lattice(n_side, seed)
    if pp.kind == "lattice-bernoulli":
        return points.sample_lattice_bernoulli(pp.retention, n_side, seed)
    raise ParameterError(f"unknown point process kind {pp.kind!r}")


def crossing_sweep(m, pp, k_max: int, replicas: int, seed: int) -> CrossingReport:
    """Empirical stagewise crossing probabilities with Wilson intervals.

    Each replica draws a fresh configuration covering all stages up to
    k_max and samples only the left-right edges (bipartite walk); a
    replica contributes to stage k when any of its edges crosses at k.
    """
    if not 1 <= k_max <= _STAGE_CAP:
        raise ParameterError(f"k_max must lie in [1, {_STAGE_CAP}]")
    if replicas < 1:
        raise ParameterError("need at least one replica")
    from . import rng

    hits = np.zeros(k_max + 1, dtype=np.int64)
    none_below = 0
    n_side = 2 ** (k_max + 1)
    for r in range(replicas):
        seed_r = rng.derive_seed(seed, r)
        cfg = _counted_configuration(pp, n_side, seed_r)
        g = sampler.sample_crossing_edges(cfg, m, seed_r)
        if len(g.edges):
            stages = edge_stages(g.edges[:, 0], g.edges[:, 1])
            stages = stages[stages <= k_max]
        else:
            stages = np.empty(0, dtype=np.int64)
        if len(stages) == 0:
            none_below += 1
        else:
            hits[np.unique(stages)] += 1
    freq, lo, hi = [], [], []
    for k in range(1, k_max + 1):
        p, a, b = wilson_interval(int(hits[k]), replicas)
        freq.append(p)
        lo.append(a)
        hi.append(b)
    return CrossingReport(
        k_values=tuple(range(1, k_max + 1)),
        chi_freq=tuple(freq), ci_low=tuple(lo), ci_high=tuple(hi),
        no_crossing_freq=none_below / replicas, replicas=replicas)


def block_partition(cfg, N: int, i_range=None):
    """Half-overlapping blocks of 2N consecutive indices; block 0 is [-N, N-1]."""
    if N < 1:
        raise ParameterError("block scale N must be at least 1")
    if i_range is None:
        i_min = -(-cfg.index_min // N) + 1  # ceil division
        i_max = (cfg.index_max + 1) // N - 1
        i_range = range(i_min, i_max + 1)
    blocks = []
    for i in i_range:
        lo = N * (i - 1)
        hi = N * (i + 1) - 1
        cfg.require_index(lo)
        cfg.require_index(hi)
        blocks.append(Block(i=int(i), index_lo=lo, index_hi=hi))
    return blocks


def block_goodness(g: sampler.GraphSample, N: int, theta: float,
                   i_range=None) -> BlockReport:
    """Largest induced-subgraph component per block; good iff >= 2*theta*N."""
    if not 0 < theta < 1:
        raise ParameterError("theta must lie in (0, 1)")
    cfg = g.config
    blocks = block_partition(cfg, N, i_range)
    rows = []
    bad = 0
    for blk in blocks:
        mask = ((g.edges[:, 0] >= blk.index_lo) & (g.edges[:, 0] <= blk.index_hi)
                & (g.edges[:, 1] >= blk.index_lo) & (g.edges[:, 1] <= blk.index_hi))
        sub = np.ascontiguousarray(g.edges[mask] - blk.index_lo)
        labels = _compiled.component_labels(np.int64(2 * N), sub)
        _, sizes = np.unique(labels, return_counts=True)
        largest = int(sizes.max())
        good = largest + _FLOAT_GUARD >= 2 * theta * N
        if not good:
            bad += 1
        rows.append(BlockRow(i=blk.i, index_lo=blk.index_lo,
                             index_hi=blk.index_hi, largest=largest,
                             is_good=bool(good)))
    return BlockReport(scale=N, theta=theta, rows=tuple(rows),
                       bad_fraction=bad / len(rows) if rows else 0.0)


def block_goodness_sweep(m, pp, N: int, theta: float, replicas: int,
                         seed: int) -> BlockReport:
    """Replica estimate of the bad-block probability for the root block."""
    if replicas < 1:
        raise ParameterError("need at least one replica")
    from . import rng

    bad = 0
    last_rows = ()
    for r in range(replicas):
        seed_r = rng.derive_seed(seed, r)
        cfg = _counted_configuration(pp, N, seed_r)
        g = sampler.sample_edges_layered(cfg, m, seed_r)
        rep = block_goodness(g, N, theta, i_range=(0,))
        last_rows = rep.rows
        if not rep.rows[0].is_good:
            bad += 1
    p, lo, hi = wilson_interval(bad, replicas)
    return BlockReport(scale=N, theta=theta, rows=last_rows, bad_fraction=p,
                       empirical_p_bad=p, p_bad_ci=(lo, hi), replicas=replicas)


def mu_regular_lower(marks, mu: float, theta_star: float, K_prev: int) -> bool:
    """Lower mark-regularity of a candidate component's vertex marks.

    The list must have exactly floor(theta_star * K_prev) entries; the
    empirical mark CDF must clear half its expected mass at every one of
    the floor((theta_star*K_prev)^(1-mu)) inspection levels.
    """
    if not 0 < mu < 0.5:
        raise ParameterError("mu must lie in (0, 1/2)")
    if not 0.75 < theta_star < 1:
        raise ParameterError("theta_star must lie in (3/4, 1)")
    if K_prev < 2:
        raise ParameterError("K_prev must be at least 2")
    marks = np.asarray(marks, dtype=np.float64)
    size = int(math.floor(theta_star * K_prev + _FLOAT_GUARD))
    if len(marks) != size:
        raise DomainError(f"mark list must have exactly {size} entries, "
                          f"got {len(marks)}")
    M = int(math.floor((theta_star * K_prev) ** (1.0 - mu) + _FLOAT_GUARD))
    s = np.sort(marks)
    levels = np.arange(1, M + 1, dtype=np.float64)
    counts = np.searchsorted(s, levels / M, side="right")
    required = levels * (theta_star * K_prev) / (2.0 * M)
    return bool(np.all(counts + _FLOAT_GUARD >= required))


def mu_regular_upper(marks, mu: float, k: int) -> bool:
    """Upper mark-regularity of a stage-k set: no extreme mark, flat CDF cap."""
    if not 0 < mu < 0.5:
        raise ParameterError("mu must lie in (0, 1/2)")
    if k < 1:
        raise ParameterError("k must be at least 1")
    marks = np.asarray(marks, dtype=np.float64)
    if len(marks) != 2**k:
        raise DomainError(f"mark list must have exactly {2**k} entries, "
                          f"got {len(marks)}")
    floor_level = 2.0 ** (-(1.0 + mu) * k)
    if np.any(marks < floor_level):
        return False
    m_levels = int(math.ceil(2.0 ** ((1.0 - mu) * k) - _FLOAT_GUARD))
    s = np.sort(marks)
    levels = np.arange(1, m_levels + 1, dtype=np.float64)
    counts = np.searchsorted(s, levels / m_levels, side="right")
    bound = levels * (2.0 ** (k + 1)) / m_levels
    return bool(np.all(counts <= bound + _FLOAT_GUARD))


def recursion_report(m, pp, schedule: ScaleSchedule, replicas: int,
                     seed: int, n: int = 2) -> dict:
    """Both sides of the bad-block recursion at scale n, for inspection only.

    Estimates the left side p(K_n, theta - 2/C_n) and the right side
    (1/100) p(K_{n-1}, theta) + 2 C_n^2 p(K_{n-1}, theta)^2 from
    independent replica sweeps. Reported, never asserted: the inequality
    is an asymptotic statement far beyond desk-scale K.
    """
    if n < 2:
        raise ParameterError("the recursion starts at scale index 2")
    K_n = schedule.K_n(n)
    if K_n > 4096:
        raise ParameterError("scale too large to measure; use a smaller K or n")
    C = schedule.C_n(n)
    theta_lhs = schedule.theta - 2.0 / C
    if not 0 < theta_lhs < 1:
        raise ParameterError("theta - 2/C_n falls outside (0, 1)")
    lhs = block_goodness_sweep(m, pp, K_n, theta_lhs, replicas, seed)
    prev = block_goodness_sweep(m, pp, schedule.K_n(n - 1), schedule.theta,
                                replicas, seed + 1)
    p_prev = prev.empirical_p_bad
    return {
        "n": n,
        "K_n": K_n,
        "C_n": C,
        "lhs_p_bad": lhs.empirical_p_bad,
        "lhs_ci": lhs.p_bad_ci,
        "rhs_value": 0.01 * p_prev + 2.0 * C * C * p_prev * p_prev,
        "prev_p_bad": p_prev,
        "prev_ci": prev.p_bad_ci,
        "replicas": replicas,
    }
