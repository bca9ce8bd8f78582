"""Shared fixtures and independent numerical oracles for the test suite."""
from __future__ import annotations

import math

import numpy as np
import pytest

from sgdsmooth import SpikyParams, make_quadratic, make_spiky


def bisect_root(fn, lo: float, hi: float, iters: int = 200) -> float:
    """Plain bisection; assumes a sign change on [lo, hi]."""
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def stationary_points(params: SpikyParams, lo: float, hi: float, scan: int = 20_001):
    """All 1-d stationary points of the spiky landscape in [lo, hi], found
    by sign-change scan plus bisection.  Independent of the package's own
    gradient oracle on purpose: uses the formula directly."""
    q, a, b = params.quad, params.amp, params.freq

    def grad(x: float) -> float:
        return q * x + a * b * math.cos(b * x)

    xs = np.linspace(lo, hi, scan)
    roots = []
    prev = grad(xs[0])
    for x in xs[1:]:
        cur = grad(x)
        if prev * cur < 0.0:
            roots.append(bisect_root(grad, x - (xs[1] - xs[0]), x))
        prev = cur
    return np.array(roots)


def local_minima(params: SpikyParams, lo: float, hi: float) -> np.ndarray:
    """Stationary points with positive second derivative."""
    q, a, b = params.quad, params.amp, params.freq
    roots = stationary_points(params, lo, hi)
    curv = q - a * b**2 * np.sin(b * roots)
    return roots[curv > 0.0]


@pytest.fixture
def spiky_default():
    return make_spiky(SpikyParams())


@pytest.fixture
def quadratic_1d():
    return make_quadratic(1)
