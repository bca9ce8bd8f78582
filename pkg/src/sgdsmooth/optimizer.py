"""SGD / GD runner with shadow-sequence bookkeeping.

The iterate update is split exactly as x_{t+1} = y_t - eta*omega_t with
y_t = x_t - eta*grad f(x_t), so the recorded shadow sequence satisfies
the one-step identity

    y_{t+1} = y_t - eta*omega_t - eta*grad f(y_t - eta*omega_t)

bitwise within any constant-eta stage.  Noise for a stage is drawn in a
single batch up front; this fixes the stream layout so the vectorized
ensemble engine in expcli replays identical trajectories.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .noise import NoiseKernel, RngStream
from .objectives import Objective, as_point

__all__ = ["Stage", "StepSchedule", "Trajectory", "sgd_run", "gd_run", "shadow_check"]

DIVERGENCE_CUTOFF = 1e6


@dataclass(frozen=True)
class Stage:
    eta: float
    steps: int
    kernel: NoiseKernel

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")


@dataclass(frozen=True)
class StepSchedule:
    """Ordered (eta, steps, kernel) stages; later stages warm-start from
    the previous stage's final iterate."""

    stages: tuple[Stage, ...]

    def __post_init__(self):
        if len(self.stages) == 0:
            raise ValueError("schedule needs at least one stage")
        dims = {s.kernel.dimension for s in self.stages}
        if len(dims) != 1:
            raise ValueError(f"stages disagree on dimension: {dims}")

    @property
    def total_steps(self) -> int:
        return sum(s.steps for s in self.stages)

    @property
    def dimension(self) -> int:
        return self.stages[0].kernel.dimension


@dataclass
class Trajectory:
    """Full record of one run: iterates, shadow points, losses and noise.

    Arrays have length T+1 (T = recorded steps); `omegas[t]` is the noise
    applied when leaving step t, with a zero row at the end.  `etas[t]`
    and `stage_idx[t]` describe the stage the point belongs to (the final
    point inherits the last stage).
    """

    xs: np.ndarray          # (T+1, d)
    ys: np.ndarray          # (T+1, d), y_t = x_t - eta_t * grad f(x_t)
    omegas: np.ndarray      # (T+1, d)
    fs: np.ndarray          # (T+1,)
    grad_norms: np.ndarray  # (T+1,)
    noise_norms: np.ndarray # (T+1,)
    dist2: np.ndarray       # (T+1,) squared x-distance to target (nan if unknown)
    y_dist2: np.ndarray     # (T+1,) squared y-distance to target (nan if unknown)
    stage_idx: np.ndarray   # (T+1,) int
    etas: np.ndarray        # (T+1,)
    out_of_box: np.ndarray  # (T+1,) bool
    diverged: bool = False
    target: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def dimension(self) -> int:
        return self.xs.shape[1]

    @property
    def final_x(self) -> np.ndarray:
        return self.xs[-1]

    @property
    def final_y(self) -> np.ndarray:
        return self.ys[-1]

    def csv_header(self) -> list[str]:
        d = self.dimension
        return (
            ["t", "stage"]
            + [f"x_{i}" for i in range(d)]
            + ["f", "grad_norm", "noise_norm", "dist2", "out_of_box"]
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.csv_header())
            for t in range(len(self)):
                row = [t, int(self.stage_idx[t])]
                row += [repr(float(v)) for v in self.xs[t]]
                row += [
                    repr(float(self.fs[t])),
                    repr(float(self.grad_norms[t])),
                    repr(float(self.noise_norms[t])),
                    repr(float(self.dist2[t])),
                    int(self.out_of_box[t]),
                ]
                writer.writerow(row)


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Read a persisted trajectory back into column arrays, losslessly."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


def _allocate(total: int, d: int) -> Trajectory:
    n = total + 1
    return Trajectory(
        xs=np.zeros((n, d)),
        ys=np.zeros((n, d)),
        omegas=np.zeros((n, d)),
        fs=np.zeros(n),
        grad_norms=np.zeros(n),
        noise_norms=np.zeros(n),
        dist2=np.full(n, np.nan),
        y_dist2=np.full(n, np.nan),
        stage_idx=np.zeros(n, dtype=int),
        etas=np.zeros(n),
        out_of_box=np.zeros(n, dtype=bool),
    )


def _truncate(traj: Trajectory, n: int) -> None:
    for name in (
        "xs", "ys", "omegas", "fs", "grad_norms", "noise_norms",
        "dist2", "y_dist2", "stage_idx", "etas", "out_of_box",
    ):
        setattr(traj, name, getattr(traj, name)[:n])


def sgd_run(
    obj: Objective,
    schedule: StepSchedule,
    x0,
    rng: RngStream = RngStream(0),
) -> Trajectory:
    """Run staged SGD from x0 and record the full trajectory.

    Iterates are never projected; leaving the domain box only sets the
    out_of_box flag.  A non-finite or > 1e6-norm iterate truncates the
    trajectory and marks it diverged.
    """
    d = obj.dimension
    if schedule.dimension != d:
        raise ValueError("schedule kernel dimension does not match objective")
    x = as_point(x0, d).copy()
    traj = _allocate(schedule.total_steps, d)
    traj.target = obj.target
    lo, hi = obj.domain_box
    gen = rng.generator()

    t = 0
    for si, stage in enumerate(schedule.stages):
        eta = stage.eta
        omegas = stage.kernel.sample_batch(stage.steps, gen)
        for k in range(stage.steps):
            g = obj.grad(x)
            y = x - eta * g
            w = omegas[k]
            _record(traj, t, x, y, g, w, obj, eta, si, lo, hi)
            if not _finite_ok(x):
                traj.diverged = True
                _truncate(traj, t + 1)
                return traj
            x = y - eta * w
            t += 1

    # final point, no outgoing noise
    last = schedule.stages[-1]
    g = obj.grad(x)
    y = x - last.eta * g
    _record(traj, t, x, y, g, np.zeros(d), obj, last.eta, len(schedule.stages) - 1, lo, hi)
    if not _finite_ok(x):
        traj.diverged = True
        _truncate(traj, t + 1)
    return traj


def _finite_ok(x: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(x))) and float(np.max(np.abs(x))) <= DIVERGENCE_CUTOFF


def _record(traj, t, x, y, g, w, obj, eta, si, lo, hi) -> None:
    traj.xs[t] = x
    traj.ys[t] = y
    traj.omegas[t] = w
    traj.fs[t] = obj.value(x)
    traj.grad_norms[t] = math.sqrt(float(g @ g))
    traj.noise_norms[t] = math.sqrt(float(w @ w))
    traj.stage_idx[t] = si
    traj.etas[t] = eta
    traj.out_of_box[t] = bool(np.any(x < lo) or np.any(x > hi))
    if obj.target is not None:
        dx = x - obj.target
        dy = y - obj.target
        traj.dist2[t] = float(dx @ dx)
        traj.y_dist2[t] = float(dy @ dy)


def gd_run(obj: Objective, eta: float, steps: int, x0) -> Trajectory:
    """Noiseless gradient descent: sgd_run with the zero kernel."""
    kernel = NoiseKernel("zero", 0.0, obj.dimension)
    schedule = StepSchedule((Stage(eta, steps, kernel),))
    return sgd_run(obj, schedule, x0)


def shadow_check(traj: Trajectory, obj: Objective) -> float:
    """Max residual of the shadow update identity over constant-eta pairs.

    Stage-boundary indices (where eta changes) are skipped: the identity
    is only defined within a stage.
    """
    worst = 0.0
    for t in range(len(traj) - 1):
        if traj.etas[t + 1] != traj.etas[t]:
            continue
        eta = traj.etas[t]
        inner = traj.ys[t] - eta * traj.omegas[t]
        predicted = inner - eta * obj.grad(inner)
        residual = float(np.linalg.norm(traj.ys[t + 1] - predicted))
        worst = max(worst, residual)
    return worst
