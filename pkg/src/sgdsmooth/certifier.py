"""Monte Carlo certification of one-point convexity toward a target.

The central estimate is the inner product between the negative smoothed
gradient at the shadow point y = x - eta*grad f(x) and the direction
x* - y, with a Hoeffding confidence interval propagated through the
inner product.  A point certifies at level c_min when even the CI lower
bound clears c_min * |x* - y|^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .noise import NoiseKernel, RngStream
from .objectives import Objective, as_point
from .optimizer import Trajectory
from .smoothing import smoothed_grad_mc

__all__ = [
    "OpcCertificate",
    "ScanReport",
    "assumption1_estimate",
    "region_scan",
    "trajectory_opc",
    "neighborhood_opc",
    "line_probe",
    "TrajectoryOpcReport",
    "NeighborhoodStats",
    "LineProbeReport",
]

DEGENERATE_DIST2 = 1e-12


@dataclass(frozen=True)
class OpcCertificate:
    x: np.ndarray
    y: np.ndarray
    inner: float
    dist2: float
    c_hat: float            # nan when degenerate
    ci_halfwidth: float
    n: int
    c_min: float
    passed: bool
    degenerate: bool


def assumption1_estimate(
    obj: Objective,
    kernel: NoiseKernel,
    eta: float,
    x,
    target,
    n: int,
    rng: RngStream = RngStream(0),
    c_min: float = 0.0,
    confidence: float = 0.99,
) -> OpcCertificate:
    """Certify one-point convexity of the smoothed landscape at one point."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    px = as_point(x, obj.dimension)
    tgt = as_point(target, obj.dimension)
    y = px - eta * obj.grad_at(px)
    direction = tgt - y
    dist2 = float(direction @ direction)

    est = smoothed_grad_mc(obj, kernel, eta, y, n=n, rng=rng, confidence=confidence)
    inner = float(-np.asarray(est.mean) @ direction)
    # per-coordinate CI propagated through the inner product
    ci = float(np.abs(direction) @ np.asarray(est.confidence_halfwidth))

    if dist2 < DEGENERATE_DIST2:
        return OpcCertificate(px, y, inner, dist2, math.nan, ci, n, c_min, False, True)
    passed = (inner - ci) >= c_min * dist2
    return OpcCertificate(px, y, inner, dist2, inner / dist2, ci, n, c_min, passed, False)


@dataclass(frozen=True)
class ScanReport:
    certificates: list[OpcCertificate]
    pass_fraction: float
    certified_c: float      # inf over non-degenerate points of (inner - ci)/dist2
    degenerate_count: int
    c_min: float


def region_scan(
    obj: Objective,
    kernel: NoiseKernel,
    eta: float,
    target,
    grid,
    c_min: float,
    n: int,
    rng: RngStream = RngStream(0),
    confidence: float = 0.99,
    stop_on_fail: bool = False,
) -> ScanReport:
    """Certify every grid point; the certified c for downstream theorem
    constants is the infimum of the CI-lower-bounded ratio.

    `stop_on_fail` short-circuits after the first failing point (used by
    the noise-calibration sweep, where only pass/fail matters).
    """
    grid = [as_point(g, obj.dimension) for g in grid]
    if len(grid) == 0:
        raise ValueError("grid must be non-empty")
    certs: list[OpcCertificate] = []
    for i, x in enumerate(grid):
        cert = assumption1_estimate(
            obj, kernel, eta, x, target, n,
            rng=RngStream(rng.seed, rng.stream_id + i),
            c_min=c_min, confidence=confidence,
        )
        certs.append(cert)
        if stop_on_fail and not cert.degenerate and not cert.passed:
            break
    live = [c for c in certs if not c.degenerate]
    frac = sum(c.passed for c in live) / len(live) if live else 0.0
    certified = min(((c.inner - c.ci_halfwidth) / c.dist2 for c in live), default=-math.inf)
    return ScanReport(
        certificates=certs,
        pass_fraction=frac,
        certified_c=certified,
        degenerate_count=len(certs) - len(live),
        c_min=c_min,
    )


@dataclass(frozen=True)
class TrajectoryOpcReport:
    inners: np.ndarray
    min_inner: float
    argmin: int
    first_positive: Optional[int]


def trajectory_opc(traj: Trajectory, obj: Objective, target) -> TrajectoryOpcReport:
    """Per-step inner products <-grad f(x_t), target - x_t> along a run."""
    tgt = as_point(target, obj.dimension)
    grads = obj.grads_at(traj.xs)
    inners = np.einsum("ij,ij->i", -grads, tgt[None, :] - traj.xs)
    positive = np.nonzero(inners > 0)[0]
    return TrajectoryOpcReport(
        inners=inners,
        min_inner=float(inners.min()),
        argmin=int(inners.argmin()),
        first_positive=int(positive[0]) if positive.size else None,
    )


@dataclass(frozen=True)
class NeighborhoodStats:
    min: float
    mean: float
    max: float
    n: int


def neighborhood_opc(
    obj: Objective,
    center,
    target,
    radius: float,
    n: int,
    rng: RngStream = RngStream(0),
) -> NeighborhoodStats:
    """Inner-product band over n random points in a ball around `center`.

    For each sampled w the statistic is <-grad f(w), target - center>,
    probing whether the whole neighborhood points toward the target.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ctr = as_point(center, obj.dimension)
    tgt = as_point(target, obj.dimension)
    ball = NoiseKernel("uniform-ball", radius, obj.dimension) if radius > 0 else NoiseKernel("zero", 0.0, obj.dimension)
    pts = ctr[None, :] + ball.sample_batch(n, rng.generator())
    inners = np.einsum("ij,ij->i", -obj.grads_at(pts), np.broadcast_to(tgt - ctr, pts.shape))
    return NeighborhoodStats(float(inners.min()), float(inners.mean()), float(inners.max()), n)


@dataclass(frozen=True)
class LineProbeReport:
    ts: np.ndarray
    values: np.ndarray
    directional_derivs: np.ndarray   # <grad f(.), target - x> along the segment
    above_endpoint: bool             # g(t) > g(1) for all t < 1
    monotone_decreasing: bool        # directional derivative < 0 for t < 1
    sign_changes: int
    degenerate: bool


def line_probe(obj: Objective, x, target, k: int) -> LineProbeReport:
    """Evaluate f along the segment from x to target at k uniform points.

    Reports whether every interior value stays above the endpoint value
    and the sign pattern of the directional derivative, which together
    expose spikes between x and the target.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    px = as_point(x, obj.dimension)
    tgt = as_point(target, obj.dimension)
    ts = np.linspace(0.0, 1.0, k)
    pts = ts[:, None] * tgt[None, :] + (1.0 - ts)[:, None] * px[None, :]
    values = obj.values_at(pts)
    direction = tgt - px
    derivs = obj.grads_at(pts) @ direction
    if float(direction @ direction) < DEGENERATE_DIST2:
        return LineProbeReport(ts, values, derivs, False, False, 0, True)
    above = bool(np.all(values[:-1] > values[-1]))
    monotone = bool(np.all(derivs[:-1] < 0))
    signs = np.sign(derivs[:-1])
    changes = int(np.sum(signs[1:] != signs[:-1]))
    return LineProbeReport(ts, values, derivs, above, monotone, changes, False)
