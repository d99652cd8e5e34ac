"""Ballistic launcher task.

A projectile is launched from the origin with an angle/force pair, flies
under gravity and bounces on the ground with a fixed restitution factor.
The flight is integrable in closed form, so trajectories are computed
analytically rather than stepped: for a bounce sequence the k-th arc starts
at time t_k = A (1 - e^k) / (1 - e) with A = 2 v_y0 / g, and the arc index
for a query time follows from inverting that geometric sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..validation import as_float_array, check_in_bounds, check_matrix
from .base import TRAJECTORY_STEPS, flatten_batch

HALF_PI = float(np.pi / 2)


@dataclass(frozen=True)
class BallisticConfig:
    """Physical constants and genotype bounds of the launcher."""

    gravity: float = 9.81
    restitution: float = 0.75
    duration: float = 5.0
    force_max: float = 10.0
    angle_min: float = 0.05
    angle_max: float = HALF_PI

    def __post_init__(self):
        if self.gravity <= 0:
            raise ValueError("gravity must be positive")
        if not 0.0 < self.restitution < 1.0:
            raise ValueError("restitution must lie in (0, 1)")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.force_max <= 0:
            raise ValueError("force_max must be positive")
        if not 0.0 <= self.angle_min < self.angle_max <= HALF_PI:
            raise ValueError("need 0 <= angle_min < angle_max <= pi/2")


class BallisticTask:
    """Closed-form projectile simulation with ground bounces.

    Genotype: (angle, force). Trajectory: 50 evenly spaced (x, y) samples
    over the full duration. Ground-truth descriptor: apex of the first arc.
    """

    name = "ballistic"
    metric = "klc"
    has_ground_truth = True
    genotype_dim = 2

    def __init__(self, config: BallisticConfig | None = None):
        self.config = config or BallisticConfig()
        cfg = self.config
        self.lower_bounds = np.array([cfg.angle_min, 0.0])
        self.upper_bounds = np.array([cfg.angle_max, cfg.force_max])

    def sample_times(self):
        """The 50 query times t_j = j * T / 49, j = 0..49."""
        cfg = self.config
        return np.linspace(0.0, cfg.duration, TRAJECTORY_STEPS)

    def simulate(self, genotype):
        """Trajectory of a single genotype, shape (50, 2)."""
        return self.simulate_batch(np.asarray(genotype, dtype=float)[None, :])[0]

    def simulate_batch(self, genotypes):
        """Trajectories for a (B, 2) genotype batch, shape (B, 50, 2)."""
        g = check_matrix(genotypes, n_cols=2, name="genotypes")
        check_in_bounds(g, self.lower_bounds, self.upper_bounds, "genotypes")
        cfg = self.config
        angle, force = g[:, 0], g[:, 1]
        t = self.sample_times()[None, :]
        vx = (force * np.cos(angle))[:, None]
        vy0 = (force * np.sin(angle))[:, None]
        x = vx * t
        y = self._bounce_height(vy0, t)
        return np.stack([x, y], axis=-1)

    def _bounce_height(self, vy0, t):
        """Height at time t for initial vertical speed vy0, with bounces.

        Solves for the arc index k such that t falls inside the k-th bounce
        arc, then evaluates the parabola of that arc. Once the geometric
        bounce times accumulate past t (u <= 0 below), the projectile is
        treated as rolling at y = 0.
        """
        cfg = self.config
        e = cfg.restitution
        gacc = cfg.gravity
        with np.errstate(divide="ignore", invalid="ignore"):
            period0 = 2.0 * vy0 / gacc
            u = 1.0 - t * (1.0 - e) / period0
            k = np.floor(np.log(u) / np.log(e))
        live = (vy0 > 0.0) & (u > 0.0)
        k = np.where(live, k, 0.0)
        ek = np.power(e, k)
        arc_start = period0 * (1.0 - ek) / (1.0 - e)
        tau = t - arc_start
        arc_speed = vy0 * ek
        y = arc_speed * tau - 0.5 * gacc * tau * tau
        y = np.where(live, y, 0.0)
        return np.maximum(y, 0.0)

    def ground_truth_batch(self, genotypes, trajectories=None):
        """Apex (max x-reach, max height) of the first arc, shape (B, 2).

        Analytic: X = F^2 sin(a) cos(a) / g at the apex time, Y = (F sin
        a)^2 / (2 g). The trajectory argument is accepted for interface
        uniformity and ignored.
        """
        g = check_matrix(genotypes, n_cols=2, name="genotypes")
        check_in_bounds(g, self.lower_bounds, self.upper_bounds, "genotypes")
        cfg = self.config
        angle, force = g[:, 0], g[:, 1]
        vx = force * np.cos(angle)
        vy = force * np.sin(angle)
        apex_x = vx * vy / cfg.gravity
        apex_y = vy * vy / (2.0 * cfg.gravity)
        return np.stack([apex_x, apex_y], axis=-1)

    def sampled_apex(self, trajectory):
        """Fallback ground truth from samples alone: the max-altitude point.

        Less precise than the analytic apex; the gap is bounded by the
        curvature between samples, g * (T/49)^2 / 8 in altitude.
        """
        traj = check_matrix(trajectory, n_cols=2, name="trajectory")
        j = int(np.argmax(traj[:, 1]))
        return traj[j].copy()

    def descriptor_bounds(self):
        """Axis-aligned bounds of the ground-truth descriptor space.

        The apex coordinates are maximised by a 45-degree launch at full
        force (x) and a vertical launch at full force (y).
        """
        cfg = self.config
        fmax2 = cfg.force_max * cfg.force_max
        return np.array([[0.0, fmax2 / cfg.gravity], [0.0, fmax2 / (2.0 * cfg.gravity)]])

    def metric_bounds(self):
        """Alias used by the metric layer; same space as the apex bounds."""
        return self.descriptor_bounds()

    def sensory_bounds(self):
        """Physical bounds of each sensory dimension, shape (2, 100).

        x samples cannot exceed full-force horizontal flight for the whole
        duration; y samples cannot exceed the highest possible apex.
        """
        cfg = self.config
        x_hi = cfg.force_max * cfg.duration
        y_hi = cfg.force_max * cfg.force_max / (2.0 * cfg.gravity)
        lower = np.zeros((TRAJECTORY_STEPS, 2))
        upper = np.tile(np.array([x_hi, y_hi]), (TRAJECTORY_STEPS, 1))
        return np.stack([lower.reshape(-1), upper.reshape(-1)])

    def prior_genotypes(self, n_samples=10000):
        """Regular grid over genotype space used to build prior datasets.

        Uses an s x s grid with s = round(sqrt(n_samples)); n_samples must
        be a perfect square so the grid is exact.
        """
        side = int(round(np.sqrt(n_samples)))
        if side * side != n_samples:
            raise ValueError("n_samples must be a perfect square for a grid prior")
        angles = np.linspace(self.lower_bounds[0], self.upper_bounds[0], side)
        forces = np.linspace(self.lower_bounds[1], self.upper_bounds[1], side)
        aa, ff = np.meshgrid(angles, forces, indexing="ij")
        return np.stack([aa.reshape(-1), ff.reshape(-1)], axis=-1)

    def sensory_batch(self, genotypes):
        """Convenience: flattened sensory rows for a genotype batch."""
        return flatten_batch(self.simulate_batch(genotypes))


def bounce_height_reference(vy0, t, gravity=9.81, restitution=0.75):
    """Scalar re-derivation of the bounce height by explicit arc walking.

    Kept separate from the vectorised closed form so the two can be checked
    against each other.
    """
    vy0 = float(vy0)
    if vy0 <= 0.0:
        return 0.0
    start = 0.0
    speed = vy0
    while True:
        arc = 2.0 * speed / gravity
        if t <= start + arc:
            break
        if arc < 1e-12:
            return 0.0
        start += arc
        speed *= restitution
    tau = t - start
    return max(speed * tau - 0.5 * gravity * tau * tau, 0.0)
