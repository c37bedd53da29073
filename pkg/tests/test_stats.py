"""Wilson interval and Hill estimator checks."""

import math

import numpy as np
import pytest

from wdrcm.errors import ParameterError
from wdrcm.stats import hill_tail_index, wilson_interval

_Z = 1.959963984540054


def test_wilson_known_values():
    p, lo, hi = wilson_interval(50, 100)
    assert p == 0.5
    assert lo == pytest.approx(0.4038, abs=1e-3)
    assert hi == pytest.approx(0.5962, abs=1e-3)
    # zero successes: closed-form upper bound z^2 / (n + z^2)
    p0, lo0, hi0 = wilson_interval(0, 10)
    assert p0 == 0.0 and lo0 == 0.0
    assert hi0 == pytest.approx(_Z * _Z / (10 + _Z * _Z), rel=1e-12)


def test_wilson_properties():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 500))
        s = int(rng.integers(0, n + 1))
        p, lo, hi = wilson_interval(s, n)
        assert 0.0 <= lo <= p <= hi <= 1.0
        # symmetry under success/failure exchange
        q, lo2, hi2 = wilson_interval(n - s, n)
        assert lo == pytest.approx(1.0 - hi2, abs=1e-12)
        assert hi == pytest.approx(1.0 - lo2, abs=1e-12)


def test_wilson_interval_narrows_with_trials():
    _, lo1, hi1 = wilson_interval(10, 20)
    _, lo2, hi2 = wilson_interval(100, 200)
    assert hi2 - lo2 < hi1 - lo1


def test_wilson_validation():
    with pytest.raises(ParameterError):
        wilson_interval(0, 0)
    with pytest.raises(ParameterError):
        wilson_interval(5, 4)
    with pytest.raises(ParameterError):
        wilson_interval(-1, 4)


def test_hill_recovers_pareto_index():
    rng = np.random.default_rng(11)
    x = rng.uniform(size=100_000) ** (-1.0 / 2.5)
    alpha, flagged = hill_tail_index(x, 5000)
    assert not flagged
    assert alpha == pytest.approx(2.5, abs=0.1)


def test_hill_scale_invariant():
    rng = np.random.default_rng(12)
    x = rng.uniform(size=20_000) ** (-1.0 / 1.8)
    a1, _ = hill_tail_index(x, 1000)
    a2, _ = hill_tail_index(7.0 * x, 1000)
    assert a1 == pytest.approx(a2, rel=1e-12)


def test_hill_flags():
    rng = np.random.default_rng(13)
    x = rng.uniform(size=1000) ** -0.5
    _, flagged = hill_tail_index(x, 20)
    assert flagged
    # constant tail has no variation above the threshold
    alpha, flagged = hill_tail_index(np.ones(500), 100)
    assert math.isinf(alpha) and flagged
    # non-positive threshold cannot be normalized
    alpha, flagged = hill_tail_index(-np.ones(500), 100)
    assert math.isnan(alpha) and flagged


def test_hill_validation():
    with pytest.raises(ParameterError):
        hill_tail_index(np.ones(10), 0)
    with pytest.raises(ParameterError):
        hill_tail_index(np.ones(10), 10)
