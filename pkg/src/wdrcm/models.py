"""Kernels, connection profiles, and the pairwise edge probability.

A kernel g(s,t) rescales distance through the two vertex marks; a
profile rho(z) in [0,1] turns the rescaled distance into a connection
probability.  The edge probability of a vertex pair at distance d with
marks (s,t) is rho(g(s,t) * d / beta).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, FormatError

__all__ = [
    "KERNEL_VARIANTS",
    "PROFILE_VARIANTS",
    "KernelSpec",
    "ProfileSpec",
    "ModelParams",
    "kernel_eval",
    "kernel_eval_array",
    "profile_eval",
    "profile_eval_array",
    "connection_probability",
    "connection_probability_array",
]

KERNEL_VARIANTS = ("constant", "sum", "min", "product", "preferential-attachment")
PROFILE_VARIANTS = ("hard-polynomial", "exponential-polynomial", "capped-polynomial")

# integer codes shared with the compiled sampler kernels
KERNEL_CODE = {v: i for i, v in enumerate(KERNEL_VARIANTS)}
PROFILE_CODE = {v: i for i, v in enumerate(PROFILE_VARIANTS)}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel variant plus its interpolation exponent gamma.

    gamma = 0 collapses min/product/preferential-attachment toward the
    constant kernel (the homogeneous model); gamma = 1 is admitted as
    the closed endpoint.  The constant variant ignores gamma.
    """

    variant: str = "constant"
    gamma: float = 0.0

    def __post_init__(self):
        if self.variant not in KERNEL_VARIANTS:
            raise ParameterError(f"unknown kernel variant {self.variant!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError("gamma must lie in [0, 1]")

    @property
    def code(self) -> int:
        return KERNEL_CODE[self.variant]

    def to_json_dict(self) -> dict:
        return {"variant": self.variant, "gamma": repr(float(self.gamma))}


@dataclass(frozen=True)
class ProfileSpec:
    """Profile variant with decay exponent delta (and cap for the capped variant).

    hard-polynomial        rho(z) = 1 and z^-delta
    exponential-polynomial rho(z) = 1 - exp(-z^-delta)
    capped-polynomial      rho(z) = cap * (1 and z^-delta)

    All three are comparable to 1 and z^-delta up to constants.
    """

    variant: str = "hard-polynomial"
    delta: float = 2.0
    cap: float = 1.0

    def __post_init__(self):
        if self.variant not in PROFILE_VARIANTS:
            raise ParameterError(f"unknown profile variant {self.variant!r}")
        if not self.delta > 1.0:
            raise ParameterError("delta must exceed 1")
        if self.variant == "capped-polynomial":
            if not 0.0 < self.cap <= 1.0:
                raise ParameterError("cap must lie in (0, 1]")
        elif self.cap != 1.0:
            raise ParameterError("cap applies to the capped-polynomial variant only")

    @property
    def code(self) -> int:
        return PROFILE_CODE[self.variant]

    @property
    def rho_zero_plus(self) -> float:
        """One-sided limit rho(0+): the short-distance connection probability."""
        return self.cap if self.variant == "capped-polynomial" else 1.0

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "delta": repr(float(self.delta)),
            "cap": repr(float(self.cap)),
        }


@dataclass(frozen=True)
class ModelParams:
    kernel: KernelSpec
    profile: ProfileSpec
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError("beta must be positive")

    def to_json_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_json_dict(),
            "profile": self.profile.to_json_dict(),
            "beta": repr(float(self.beta)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelParams":
        try:
            k = d["kernel"]
            p = d["profile"]
            return cls(
                kernel=KernelSpec(variant=k["variant"], gamma=float(k["gamma"])),
                profile=ProfileSpec(
                    variant=p["variant"],
                    delta=float(p["delta"]),
                    cap=float(p.get("cap", 1.0)),
                ),
                beta=float(d["beta"]),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed model document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_json_dict(json.loads(text))


def _check_mark(v):
    if not 0.0 < v < 1.0:
        raise DomainError(f"mark {v!r} outside the open interval (0, 1)")


def kernel_eval(k: KernelSpec, s: float, t: float) -> float:
    """g(s,t) for marks s, t in (0,1).  Symmetric, non-decreasing in each mark."""
    _check_mark(s)
    _check_mark(t)
    return float(kernel_eval_array(k, np.float64(s), np.float64(t)))


def kernel_eval_array(k: KernelSpec, s, t):
    """Vectorised kernel evaluation; arguments are assumed in (0,1)."""
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    g = k.gamma
    if k.variant == "constant":
        return np.ones(np.broadcast(s, t).shape)[()]
    if k.variant == "sum":
        return 1.0 / (s**-g + t**-g)
    if k.variant == "min":
        return np.minimum(s, t) ** g
    if k.variant == "product":
        return (s * t) ** g
    return np.minimum(s, t) ** g * np.maximum(s, t) ** (1.0 - g)


def profile_eval(p: ProfileSpec, z: float) -> float:
    """rho(z) for z >= 0; z = 0 returns the one-sided limit rho(0+)."""
    if z < 0:
        raise DomainError("profile argument must be nonnegative")
    return float(profile_eval_array(p, np.float64(z)))


def profile_eval_array(p: ProfileSpec, z):
    """Vectorised profile evaluation for nonnegative z."""
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore"):
        if p.variant == "exponential-polynomial":
            zd = np.where(z > 0, z, 1.0) ** -p.delta
            out = np.where(z > 0, -np.expm1(-zd), 1.0)
        else:
            out = np.minimum(1.0, np.where(z > 0, z, 1.0) ** -p.delta)
            out = np.where(z > 0, out, 1.0)
            if p.variant == "capped-polynomial":
                out = p.cap * out
    return out[()]


def connection_probability(m: ModelParams, a, b) -> float:
    """Edge probability rho(g(t_a, t_b) |x_a - x_b| / beta) for two vertices.

    Symmetric in (a, b); non-increasing in the distance and in each
    mark, non-decreasing in beta.  Coincident locations fall back on
    rho(0+); identical vertices are rejected since the model has no
    self-loops.
    """
    if a.index == b.index:
        raise DomainError("self-loops are undefined")
    g = kernel_eval(m.kernel, a.mark, b.mark)
    return profile_eval(m.profile, g * abs(a.location - b.location) / m.beta)


def connection_probability_array(m: ModelParams, s, t, dist):
    """Vectorised edge probability over mark pairs (s, t) at distances dist."""
    g = kernel_eval_array(m.kernel, s, t)
    return profile_eval_array(m.profile, g * np.asarray(dist, dtype=np.float64) / m.beta)
