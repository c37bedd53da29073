"""Small shared estimators: Wilson intervals and the Hill tail index."""
import numpy as np

from .errors import ParameterError

_Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion.

    Returns (point, lo, hi); the point estimate is the plain fraction.
    """
    if trials < 1:
        raise ParameterError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ParameterError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / trials + z2 / (4 * trials**2))
    return p, float(max(0.0, center - half)), float(min(1.0, center + half))


def hill_tail_index(values, k: int):
    """Hill estimator of the tail exponent alpha from the k largest values.

    Estimates alpha in P(X > x) ~ x^(-alpha) as the reciprocal mean log
    excess over the (k+1)-th order statistic. Returns (alpha, flagged):
    flagged when k < 50 or when the tail is degenerate (threshold not
    positive, or no variation above it).
    """
    v = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    if not 1 <= k < len(v):
        raise ParameterError("k must satisfy 1 <= k < len(values)")
    threshold = v[k]
    flagged = k < 50
    if threshold <= 0:
        return float("nan"), True
    logs = np.log(v[:k] / threshold)
    mean_log = logs.mean()
    if mean_log == 0.0:
        return float("inf"), True
    return float(1.0 / mean_log), flagged
