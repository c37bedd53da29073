"""Marked point configurations on the line.

Three vertex layouts are supported: a Palm-rooted homogeneous Poisson
process, Bernoulli site percolation on the integers, and the plain
integer lattice.  Every configuration carries a root vertex at location
0 with index 0, locations strictly increasing with the signed index,
and i.i.d. Uniform(0,1) marks.  All randomness is keyed by (seed,
stream, index), so two configurations built from the same seed agree on
every index they share regardless of window size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexRangeError, ParameterError, FormatError
from . import rng

__all__ = [
    "PointProcessSpec",
    "Vertex",
    "MarkedConfiguration",
    "sample_poisson_palm",
    "sample_poisson_palm_counted",
    "sample_lattice_bernoulli",
    "sample_deterministic_lattice",
    "sample_configuration",
    "check_evenly_spaced_a",
    "check_evenly_spaced_b",
    "scale_sequence",
]

_KINDS = ("poisson", "lattice-bernoulli", "deterministic-lattice")


@dataclass(frozen=True)
class PointProcessSpec:
    """Which vertex layout to sample and its parameters.

    intensity applies to the poisson kind (points per unit length),
    retention to lattice-bernoulli (site survival probability).
    """

    kind: str = "poisson"
    intensity: float = 1.0
    retention: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown point process kind {self.kind!r}")
        if self.kind == "poisson" and not self.intensity > 0:
            raise ParameterError("poisson intensity must be positive")
        if self.kind == "lattice-bernoulli" and not 0 < self.retention <= 1:
            raise ParameterError("retention probability must lie in (0, 1]")

    def to_json_dict(self) -> dict:
        if self.kind == "poisson":
            params = {"intensity": repr(float(self.intensity))}
        elif self.kind == "lattice-bernoulli":
            params = {"retention": repr(float(self.retention))}
        else:
            params = {}
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PointProcessSpec":
        kind = d.get("kind")
        params = d.get("params", {})
        if kind == "poisson":
            return cls(kind=kind, intensity=float(params["intensity"]))
        if kind == "lattice-bernoulli":
            return cls(kind=kind, retention=float(params["retention"]))
        if kind == "deterministic-lattice":
            return cls(kind=kind)
        raise FormatError(f"unknown point process kind {kind!r}")


@dataclass(frozen=True)
class Vertex:
    index: int
    location: float
    mark: float


class MarkedConfiguration:
    """Immutable ordered vertex set with a root at the origin.

    Vertices occupy the contiguous signed index range
    [index_min, index_max]; locations are strictly increasing in the
    index and the root (index 0) sits at location 0.  Marks lie in the
    open interval (0, 1).
    """

    def __init__(self, spec, seed, window, indices, locations, marks):
        indices = np.asarray(indices, dtype=np.int64)
        locations = np.asarray(locations, dtype=np.float64)
        marks = np.asarray(marks, dtype=np.float64)
        if not (len(indices) == len(locations) == len(marks)):
            raise ParameterError("index, location and mark arrays differ in length")
        if len(indices) == 0:
            raise ParameterError("configuration must contain at least the root")
        if np.any(np.diff(indices) != 1):
            raise ParameterError("vertex indices must be contiguous")
        if np.any(np.diff(locations) <= 0):
            raise ParameterError("locations must be strictly increasing")
        if np.any(marks <= 0) or np.any(marks >= 1):
            raise ParameterError("marks must lie strictly inside (0, 1)")
        root_pos = int(np.searchsorted(indices, 0))
        if root_pos >= len(indices) or indices[root_pos] != 0 or locations[root_pos] != 0.0:
            raise ParameterError("configuration must carry the root at index 0, location 0")
        for a in (indices, locations, marks):
            a.setflags(write=False)
        self.spec = spec
        self.seed = int(seed)
        self.window = float(window)
        self.indices = indices
        self.locations = locations
        self.marks = marks
        self._offset = -int(indices[0])

    def __len__(self):
        return len(self.indices)

    @property
    def index_min(self) -> int:
        return int(self.indices[0])

    @property
    def index_max(self) -> int:
        return int(self.indices[-1])

    def has_index(self, j: int) -> bool:
        return self.index_min <= j <= self.index_max

    def require_index(self, j: int) -> None:
        if not self.has_index(j):
            raise IndexRangeError(j)

    def position_of(self, j) -> int:
        """Array position for signed vertex index j (no bounds check)."""
        return j + self._offset

    def vertex(self, j: int) -> Vertex:
        self.require_index(j)
        p = j + self._offset
        return Vertex(int(j), float(self.locations[p]), float(self.marks[p]))

    def location(self, j: int) -> float:
        self.require_index(j)
        return float(self.locations[j + self._offset])

    def mark(self, j: int) -> float:
        self.require_index(j)
        return float(self.marks[j + self._offset])

    def to_json(self) -> str:
        doc = self.spec.to_json_dict()
        doc["seed"] = self.seed
        doc["L"] = repr(self.window)
        doc["vertices"] = [
            [int(j), repr(float(x)), repr(float(t))]
            for j, x, t in zip(self.indices, self.locations, self.marks)
        ]
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MarkedConfiguration":
        try:
            doc = json.loads(text)
            spec = PointProcessSpec.from_json_dict(doc)
            rows = doc["vertices"]
            indices = [r[0] for r in rows]
            locations = [float(r[1]) for r in rows]
            marks = [float(r[2]) for r in rows]
            return cls(spec, int(doc["seed"]), float(doc["L"]), indices, locations, marks)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise FormatError(f"malformed configuration document: {exc}") from exc


def _marks_for(seed, indices):
    return rng.uniform_open_array(seed, rng.STREAM_MARK, np.asarray(indices, dtype=np.int64))


def _poisson_side(lam, seed, stream, limit=None, count=None):
    """Cumulative Exp(lam) gaps on one side of the root.

    Stops at the last point inside [0, limit], or after `count` points.
    Gap i is keyed by its index so enlarging the window never reshuffles
    earlier points.
    """
    out = []
    start = 1
    total = 0.0
    if count is not None:
        need = count
        while need > 0:
            idx = np.arange(start, start + need, dtype=np.int64)
            gaps = -np.log(rng.uniform_open_array(seed, stream, idx)) / lam
            out.append(total + np.cumsum(gaps))
            total = float(out[-1][-1])
            start += need
            need = 0
        return np.concatenate(out)
    chunk = max(64, int(2.5 * lam * limit) + 16)
    while True:
        idx = np.arange(start, start + chunk, dtype=np.int64)
        gaps = -np.log(rng.uniform_open_array(seed, stream, idx)) / lam
        cum = total + np.cumsum(gaps)
        if cum[-1] > limit:
            out.append(cum[cum <= limit])
            break
        out.append(cum)
        total = float(cum[-1])
        start += chunk
        chunk = max(64, chunk // 2)
    return np.concatenate(out) if out else np.empty(0)


def _assemble_poisson(spec, seed, window, right, left):
    n_left = len(left)
    indices = np.arange(-n_left, len(right) + 1, dtype=np.int64)
    locations = np.concatenate([-left[::-1], [0.0], right])
    marks = _marks_for(seed, indices)
    return MarkedConfiguration(spec, seed, window, indices, locations, marks)


def sample_poisson_palm(intensity: float, window: float, seed: int) -> MarkedConfiguration:
    """Palm version of a homogeneous Poisson process on [-window, window].

    An independent root is adjoined at the origin, which realises the
    process conditioned on a point at 0.  Each vertex draws an
    independent Uniform(0,1) mark keyed by its signed index.

    Parameters
    ----------
    intensity : float
        Points per unit length, > 0.
    window : float
        Half width of the symmetric window, > 0.
    seed : int
        Master seed; identical (intensity, window, seed) reproduce the
        configuration byte for byte.
    """
    if not intensity > 0:
        raise ParameterError("intensity must be positive")
    if not window > 0:
        raise ParameterError("window must be positive")
    spec = PointProcessSpec(kind="poisson", intensity=intensity)
    right = _poisson_side(intensity, seed, rng.STREAM_GAP_RIGHT, limit=window)
    left = _poisson_side(intensity, seed, rng.STREAM_GAP_LEFT, limit=window)
    return _assemble_poisson(spec, seed, window, right, left)


def sample_poisson_palm_counted(intensity, n_left, n_right, seed) -> MarkedConfiguration:
    """Palm Poisson sample with a fixed vertex count per side.

    Same gap keying as sample_poisson_palm, so the result agrees with a
    window-based sample on every shared index.  Used where a guaranteed
    index range matters more than a fixed window length.
    """
    if not intensity > 0:
        raise ParameterError("intensity must be positive")
    if n_left < 0 or n_right < 0 or n_left + n_right == 0:
        raise ParameterError("need a positive vertex count on at least one side")
    spec = PointProcessSpec(kind="poisson", intensity=intensity)
    right = _poisson_side(intensity, seed, rng.STREAM_GAP_RIGHT, count=n_right)
    left = _poisson_side(intensity, seed, rng.STREAM_GAP_LEFT, count=n_left)
    window = max(right[-1] if n_right else 0.0, left[-1] if n_left else 0.0)
    return _assemble_poisson(spec, seed, window, right, left)


def _bernoulli_side(p, count, seed, sign):
    """Site locations of the first `count` retained sites on one side."""
    kept = []
    site = 1
    # exact per-site retention; chunked scan, expected length count/p
    while len(kept) < count:
        n = max(64, int((count - len(kept)) / p * 1.5) + 16)
        sites = np.arange(site, site + n, dtype=np.int64)
        u = rng.uniform_open_array(seed, rng.STREAM_RETAIN, sign * sites)
        kept.extend(sites[u <= p].tolist())
        site += n
    return np.asarray(kept[:count], dtype=np.float64)


def sample_lattice_bernoulli(retention: float, count: int, seed: int) -> MarkedConfiguration:
    """Bernoulli site percolation on the integers, rooted at site 0.

    Scans outward from the origin retaining each site independently
    with the given probability until `count` sites survive on each
    side; site 0 is always retained and becomes the root.
    """
    if not 0 < retention <= 1:
        raise ParameterError("retention probability must lie in (0, 1]")
    if count < 1:
        raise ParameterError("count must be at least 1")
    spec = PointProcessSpec(kind="lattice-bernoulli", retention=retention)
    right = _bernoulli_side(retention, count, seed, +1)
    left = _bernoulli_side(retention, count, seed, -1)
    window = float(max(right[-1], left[-1]))
    return _assemble_poisson(spec, seed, window, right, left)


def sample_deterministic_lattice(count: int, seed: int) -> MarkedConfiguration:
    """The integer lattice [-count, count] with random marks."""
    if count < 1:
        raise ParameterError("count must be at least 1")
    spec = PointProcessSpec(kind="deterministic-lattice")
    indices = np.arange(-count, count + 1, dtype=np.int64)
    locations = indices.astype(np.float64)
    marks = _marks_for(seed, indices)
    return MarkedConfiguration(spec, seed, float(count), indices, locations, marks)


def sample_configuration(spec: PointProcessSpec, window: float, seed: int) -> MarkedConfiguration:
    """Dispatch on spec.kind; `window` is the half width (site count for lattices)."""
    if spec.kind == "poisson":
        return sample_poisson_palm(spec.intensity, window, seed)
    if spec.kind == "lattice-bernoulli":
        return sample_lattice_bernoulli(spec.retention, int(window), seed)
    return sample_deterministic_lattice(int(window), seed)


def scale_sequence(K: int, n_max: int) -> list:
    """K_n = (n!)^3 K^n for n = 1..n_max, as exact integers."""
    if K < 1 or n_max < 1:
        raise ParameterError("K and n_max must be positive integers")
    return [(math.factorial(n) ** 3) * K**n for n in range(1, n_max + 1)]


def check_evenly_spaced_a(cfg: MarkedConfiguration, a1: float, K: int, n_max: int) -> list:
    """Spacing check on the factorial scale sequence.

    For each n <= n_max reports whether the span from vertex -K_n to
    vertex K_n - 1 is at most a1 * K_n, with K_n = (n!)^3 K^n.  Raises
    IndexRangeError naming the first missing index if the configuration
    is too small.
    """
    out = []
    for K_n in scale_sequence(K, n_max):
        cfg.require_index(-K_n)
        cfg.require_index(K_n - 1)
        span = abs(cfg.location(-K_n) - cfg.location(K_n - 1))
        out.append(bool(span <= a1 * K_n))
    return out


def check_evenly_spaced_b(cfg: MarkedConfiguration, a2: float, n_max: int) -> list:
    """Spacing check on the dyadic scale sequence.

    For each n <= n_max reports whether the span from vertex -2^(n+1)
    to vertex 2^n is at least a2 * 2^n (the complement of the crowding
    event).
    """
    if n_max < 1:
        raise ParameterError("n_max must be positive")
    out = []
    for n in range(1, n_max + 1):
        lo, hi = -(2 ** (n + 1)), 2**n
        cfg.require_index(lo)
        cfg.require_index(hi)
        span = abs(cfg.location(lo) - cfg.location(hi))
        out.append(bool(span >= a2 * 2**n))
    return out
