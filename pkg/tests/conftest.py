"""Shared fixtures and independent oracle implementations.

The oracles here are deliberately naive (nested loops, quadrature,
enumeration) so they stay independent of the library's vectorized and
FFT-based paths.
"""
from __future__ import annotations

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.signal import lfilter

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FULL_PROFILE = os.environ.get("MCVAR_ACCEPTANCE_PROFILE", "").lower() == "full"


def naive_lag_cov(values, k: int) -> np.ndarray:
    """O(n p^2) per-lag oracle: (1/n) sum of outer products of deviations."""
    y = np.asarray(values, float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    n, p = y.shape
    m = y.mean(axis=0)
    out = np.zeros((p, p))
    for i in range(n - k):
        out += np.outer(y[i] - m, y[i + k] - m)
    return out / n


def nested_sv(values, window, b: int) -> np.ndarray:
    """Pure nested-loop spectral variance oracle."""
    y = np.asarray(values, float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    n = y.shape[0]
    out = naive_lag_cov(y, 0) * float(window(0.0))
    for s in range(1, n):
        w = float(window(s / b))
        if w != 0.0:
            r = naive_lag_cov(y, s)
            out = out + w * (r + r.T)
    return out


def ar1_paths(rng: np.random.Generator, reps: int, n: int, phi: float, x0: float = 0.0) -> np.ndarray:
    """(reps, n) array of AR(1) paths; raw numpy, independent of the package."""
    eps = rng.standard_normal((reps, n))
    zi = np.full((reps, 1), phi * x0)
    x, _ = lfilter([1.0], [1.0, -phi], eps, axis=1, zi=zi)
    return x


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
