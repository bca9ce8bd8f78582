"""Convergence/stay-bound constants and their empirical validation.

The per-step distance recursion for the shadow sequence contracts at
rate lambda = 2*eta*c - eta^2*L^2 down to a noise floor b =
eta^2*r^2*(1+eta*L)^2.  After T1_min steps the shadow point is confined
to squared radius 20*b/lambda; over the next T2 steps excursions stay
within delta^2 = mu^2*b/lambda, mu = max{8, 42*sqrt(ln zeta)},
zeta = 9*T2/4.  Everything here is a pure function of its
inputs so the constants are exactly recomputable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseKernel, RngStream
from .objectives import Objective, as_point
from .optimizer import Trajectory
from .smoothing import hoeffding_halfwidth

__all__ = [
    "TheoremConstants",
    "constants",
    "divergence_threshold",
    "drift_check",
    "DriftReport",
    "stay_validate",
    "StayReport",
]


@dataclass(frozen=True)
class TheoremConstants:
    # inputs
    c: float
    eta: float
    L: float
    r: float
    y0_dist2: float
    T2: int
    # derived
    lam: float
    b: float
    T1_min: int
    stay_radius2: float
    zeta: float
    mu: float
    delta2: float
    eta_valid: bool

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "eta": self.eta,
            "L": self.L,
            "r": self.r,
            "y0_dist2": self.y0_dist2,
            "T2": self.T2,
            "lambda": self.lam,
            "b": self.b,
            "T1_min": self.T1_min,
            "stay_radius2": self.stay_radius2,
            "zeta": self.zeta,
            "mu": self.mu,
            "delta2": self.delta2,
            "eta_valid": self.eta_valid,
        }


def constants(c: float, eta: float, L: float, r: float, y0_dist2: float, T2: int) -> TheoremConstants:
    """Compute every derived constant of the convergence/stay theorem.

    T1_min clamps to 0 when the starting shadow point already lies within
    the b/lambda floor (log argument <= 1); the degenerate noiseless case
    b = 0 clamps the same way.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if L < 0 or r < 0 or y0_dist2 < 0 or T2 < 0:
        raise ValueError("L, r, y0_dist2, T2 must be nonnegative")

    lam = 2.0 * eta * c - eta**2 * L**2
    b = eta**2 * r**2 * (1.0 + eta * L) ** 2
    if b > 0 and lam > 0 and lam * y0_dist2 / b > 1.0:
        t1 = math.ceil(math.log(lam * y0_dist2 / b) / lam)
    else:
        t1 = 0
    stay_radius2 = 20.0 * b / lam if lam > 0 else math.inf
    zeta = 9.0 * T2 / 4.0
    mu = max(8.0, 42.0 * math.sqrt(math.log(zeta))) if zeta > 1.0 else 8.0
    delta2 = mu**2 * b / lam if lam > 0 else math.inf
    limits = [1.0 / (2.0 * c)]
    if L > 0:
        limits += [1.0 / (2.0 * L), c / L**2]
    eta_valid = eta < min(limits)
    return TheoremConstants(
        c=c, eta=eta, L=L, r=r, y0_dist2=y0_dist2, T2=T2,
        lam=lam, b=b, T1_min=t1, stay_radius2=stay_radius2,
        zeta=zeta, mu=mu, delta2=delta2, eta_valid=eta_valid,
    )


def divergence_threshold(c_prime: float, dist2: float, grad_norm2: float) -> float:
    """Step size above which one full-gradient step moves away from the
    target, given <-grad f(x), x*-x> <= c'|x*-x|^2: 2*c'*dist2/|grad|^2."""
    if grad_norm2 <= 0:
        raise ValueError("threshold undefined at a zero gradient")
    return 2.0 * c_prime * dist2 / grad_norm2


@dataclass(frozen=True)
class DriftReport:
    estimate: float
    ci_halfwidth: float
    rhs: float        # (1 - lambda) * |y - target|^2 + b
    passed: bool      # estimate <= rhs + ci_halfwidth
    y_dist2: float
    samples: int


def drift_check(
    obj: Objective,
    kernel: NoiseKernel,
    eta: float,
    c: float,
    L: float,
    y,
    target,
    n: int = 10_000,
    rng: RngStream = RngStream(0),
    confidence: float = 0.99,
) -> DriftReport:
    """Monte Carlo check of the one-step drift inequality

        E |y - eta*w - eta*grad f(y - eta*w) - x*|^2
            <= (1 - lambda) |y - x*|^2 + b.

    The Hoeffding range for the squared-distance samples comes from the
    reach bound |y_next - y_next0| <= eta*r*(1 + eta*L) around the
    noiseless step y_next0.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    p = as_point(y, obj.dimension)
    tgt = as_point(target, obj.dimension)
    cons = constants(c, eta, L, kernel.radius, float((p - tgt) @ (p - tgt)), 1)

    draws = kernel.sample_batch(n, rng.generator())
    inner = p[None, :] - eta * draws
    y_next = inner - eta * obj.grads_at(inner)
    diffs = y_next - tgt[None, :]
    samples = np.einsum("ij,ij->i", diffs, diffs)
    if not np.all(np.isfinite(samples)):
        raise ValueError("non-finite evaluation in drift sample")
    estimate = float(samples.mean())

    y_next0 = p - eta * obj.grad_at(p)
    d0 = float(np.linalg.norm(y_next0 - tgt))
    reach = eta * kernel.radius * (1.0 + eta * L)
    hi = (d0 + reach) ** 2
    lo = max(0.0, d0 - reach) ** 2
    rb = hi - lo
    hw = hoeffding_halfwidth(n, rb, confidence) if rb > 0 else 0.0

    y_dist2 = float((p - tgt) @ (p - tgt))
    rhs = (1.0 - cons.lam) * y_dist2 + cons.b
    # rounding allowance so the exact-equality (noiseless) case passes
    slack = 1e-12 * max(1.0, abs(rhs))
    return DriftReport(
        estimate=estimate,
        ci_halfwidth=hw,
        rhs=rhs,
        passed=estimate <= rhs + hw + slack,
        y_dist2=y_dist2,
        samples=n,
    )


@dataclass(frozen=True)
class StayReport:
    n_trials: int
    hit_fraction: float
    stay_fraction: float
    hit_and_stay_fraction: float
    T: int
    T2: int
    stay_radius2: float
    delta2: float


def stay_validate(
    trajectories: list[Trajectory],
    cons: TheoremConstants,
    target,
) -> StayReport:
    """Ensemble check of the theorem's conclusion on recorded shadow points.

    Per trial: hit = squared y-distance at T = T1_min within 20b/lambda;
    stay = squared y-distance within delta^2 for all t in [T, T + T2].
    The y-sequence is the theorem's object; x-distances carry no weight.
    """
    T, T2 = cons.T1_min, cons.T2
    tgt = None
    hits = stays = boths = 0
    for traj in trajectories:
        if len(traj) < T + T2 + 1:
            raise ValueError(f"trajectory too short: {len(traj)} <= {T + T2}")
        tgt = as_point(target, traj.dimension)
        d2 = np.einsum("ij,ij->i", traj.ys - tgt[None, :], traj.ys - tgt[None, :])
        hit = d2[T] <= cons.stay_radius2
        stay = bool(np.all(d2[T : T + T2 + 1] <= cons.delta2))
        hits += hit
        stays += stay
        boths += hit and stay
    n = len(trajectories)
    return StayReport(
        n_trials=n,
        hit_fraction=hits / n,
        stay_fraction=stays / n,
        hit_and_stay_fraction=boths / n,
        T=T,
        T2=T2,
        stay_radius2=cons.stay_radius2,
        delta2=cons.delta2,
    )
