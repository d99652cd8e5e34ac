"""Air-hockey task: a 4-link planar arm pushes a puck inside a unit arena.

The arm base sits just below the bottom wall and interpolates linearly
between two joint configurations encoded in the genotype. Contact is
kinematic: when the effector point enters the puck disc, the puck is
displaced out of penetration and takes on the effector velocity. Walls
reflect the puck with a restitution factor; friction decays its speed
linearly. The micro-step loop is compiled with numba because it runs for
every evaluation of the search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, kept soft for docs builds
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

from ..validation import as_float_array, check_in_bounds, check_matrix
from .base import TRAJECTORY_STEPS, flatten_batch

HALF_PI = float(np.pi / 2)


@dataclass(frozen=True)
class ArenaConfig:
    """Geometry and contact constants of the air-hockey setup."""

    side: float = 1.0
    base: tuple = (0.5, -0.05)
    link_lengths: tuple = (0.2, 0.2, 0.2, 0.2)
    base_orientation: float = HALF_PI
    joint_min: float = -HALF_PI
    joint_max: float = HALF_PI
    puck_radius: float = 0.03
    puck_start: tuple = (0.5, 0.35)
    friction: float = 0.25
    wall_restitution: float = 0.9
    motion_steps: int = 250
    total_steps: int = 500
    micro_dt: float = 0.004

    def __post_init__(self):
        if self.side <= 0 or self.micro_dt <= 0:
            raise ValueError("side and micro_dt must be positive")
        if not 0 < self.motion_steps <= self.total_steps:
            raise ValueError("need 0 < motion_steps <= total_steps")
        if not 0.0 < self.puck_radius < self.side / 2:
            raise ValueError("puck_radius must lie in (0, side/2)")
        if not 0.0 < self.wall_restitution <= 1.0:
            raise ValueError("wall_restitution must lie in (0, 1]")
        if self.friction < 0:
            raise ValueError("friction must be non-negative")
        if self.joint_min >= self.joint_max:
            raise ValueError("joint_min must be below joint_max")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        r = self.puck_radius
        px, py = self.puck_start
        if not (r <= px <= self.side - r and r <= py <= self.side - r):
            raise ValueError("puck_start must lie inside the walls")

    @property
    def duration(self):
        return self.total_steps * self.micro_dt


def forward_kinematics(joints, config: ArenaConfig):
    """Joint chain positions for one configuration, shape (n_links + 1, 2).

    Row 0 is the base; the last row is the effector point. Joint angles
    accumulate on top of the base orientation.
    """
    q = as_float_array(joints, "joints")
    lengths = np.asarray(config.link_lengths, dtype=float)
    if q.shape != lengths.shape:
        raise ValueError(f"expected {lengths.shape[0]} joint angles, got {q.shape}")
    pts = np.empty((lengths.shape[0] + 1, 2))
    pts[0] = config.base
    ang = config.base_orientation
    for i in range(lengths.shape[0]):
        ang += q[i]
        pts[i + 1, 0] = pts[i, 0] + lengths[i] * np.cos(ang)
        pts[i + 1, 1] = pts[i, 1] + lengths[i] * np.sin(ang)
    return pts


@njit(cache=True)
def _effector(q, base_x, base_y, orientation, lengths):
    ang = orientation
    x = base_x
    y = base_y
    for i in range(lengths.shape[0]):
        ang += q[i]
        x += lengths[i] * np.cos(ang)
        y += lengths[i] * np.sin(ang)
    return x, y


@njit(cache=True)
def _episode(init_q, final_q, lengths, base_x, base_y, orientation,
             puck_x0, puck_y0, radius, friction, wall_restitution, side,
             motion_steps, total_steps, dt):
    """Run one episode; returns micro positions, wall events, event count.

    Event rows: (time, wall code, vx before, vy before, vx after, vy after)
    with wall codes 0 = left, 1 = right, 2 = bottom, 3 = top.
    """
    pos = np.empty((total_steps + 1, 2))
    events = np.empty((2 * total_steps + 4, 6))
    n_ev = 0
    lo = radius
    hi = side - radius
    px = puck_x0
    py = puck_y0
    vx = 0.0
    vy = 0.0
    q = init_q.copy()
    ex, ey = _effector(q, base_x, base_y, orientation, lengths)
    # Resolve a possible initial penetration without transferring velocity.
    dx = px - ex
    dy = py - ey
    dist2 = dx * dx + dy * dy
    if dist2 < radius * radius:
        dist = np.sqrt(dist2)
        if dist < 1e-12:
            dx, dy, dist = 0.0, 1.0, 1.0
        px = ex + dx / dist * radius
        py = ey + dy / dist * radius
        px = min(max(px, lo), hi)
        py = min(max(py, lo), hi)
    pos[0, 0] = px
    pos[0, 1] = py
    for s in range(total_steps):
        if s < motion_steps:
            frac = (s + 1) / motion_steps
            for i in range(q.shape[0]):
                q[i] = init_q[i] + (final_q[i] - init_q[i]) * frac
        nex, ney = _effector(q, base_x, base_y, orientation, lengths)
        evx = (nex - ex) / dt
        evy = (ney - ey) / dt
        speed = np.sqrt(vx * vx + vy * vy)
        if speed > 0.0:
            slowed = speed - friction * dt
            if slowed <= 0.0:
                vx = 0.0
                vy = 0.0
            else:
                scale = slowed / speed
                vx *= scale
                vy *= scale
        px += vx * dt
        py += vy * dt
        dx = px - nex
        dy = py - ney
        dist2 = dx * dx + dy * dy
        if dist2 < radius * radius:
            dist = np.sqrt(dist2)
            if dist < 1e-12:
                emag = np.sqrt(evx * evx + evy * evy)
                if emag > 1e-12:
                    dx = evx / emag
                    dy = evy / emag
                else:
                    dx = 0.0
                    dy = 1.0
                dist = 1.0
            px = nex + dx / dist * radius
            py = ney + dy / dist * radius
            vx = evx
            vy = evy
        t_now = (s + 1) * dt
        if px < lo:
            events[n_ev, 0] = t_now
            events[n_ev, 1] = 0.0
            events[n_ev, 2] = vx
            events[n_ev, 3] = vy
            px = lo + wall_restitution * (lo - px)
            vx = -wall_restitution * vx
            events[n_ev, 4] = vx
            events[n_ev, 5] = vy
            n_ev += 1
        elif px > hi:
            events[n_ev, 0] = t_now
            events[n_ev, 1] = 1.0
            events[n_ev, 2] = vx
            events[n_ev, 3] = vy
            px = hi - wall_restitution * (px - hi)
            vx = -wall_restitution * vx
            events[n_ev, 4] = vx
            events[n_ev, 5] = vy
            n_ev += 1
        if py < lo:
            events[n_ev, 0] = t_now
            events[n_ev, 1] = 2.0
            events[n_ev, 2] = vx
            events[n_ev, 3] = vy
            py = lo + wall_restitution * (lo - py)
            vy = -wall_restitution * vy
            events[n_ev, 4] = vx
            events[n_ev, 5] = vy
            n_ev += 1
        elif py > hi:
            events[n_ev, 0] = t_now
            events[n_ev, 1] = 3.0
            events[n_ev, 2] = vx
            events[n_ev, 3] = vy
            py = hi - wall_restitution * (py - hi)
            vy = -wall_restitution * vy
            events[n_ev, 4] = vx
            events[n_ev, 5] = vy
            n_ev += 1
        if px < lo:
            px = lo
        elif px > hi:
            px = hi
        if py < lo:
            py = lo
        elif py > hi:
            py = hi
        pos[s + 1, 0] = px
        pos[s + 1, 1] = py
        ex = nex
        ey = ney
    return pos, events, n_ev


class AirHockeyTask:
    """Arm-and-puck episode resampled to a 50-point puck trajectory.

    Genotype: 8 joint angles, the start and end configurations of a linear
    joint-space motion. Ground-truth descriptor: final puck position.
    """

    name = "airhockey"
    metric = "diversity"
    has_ground_truth = True
    genotype_dim = 8

    def __init__(self, config: ArenaConfig | None = None):
        self.config = config or ArenaConfig()
        cfg = self.config
        n_joints = len(cfg.link_lengths)
        self.lower_bounds = np.full(2 * n_joints, cfg.joint_min)
        self.upper_bounds = np.full(2 * n_joints, cfg.joint_max)
        self._lengths = np.asarray(cfg.link_lengths, dtype=float)
        # Sample-time interpolation weights over the micro grid.
        idx_f = np.linspace(0.0, cfg.total_steps, TRAJECTORY_STEPS)
        i0 = np.minimum(np.floor(idx_f).astype(np.int64), cfg.total_steps - 1)
        self._interp_idx = i0
        self._interp_w = idx_f - i0

    def sample_times(self):
        return np.linspace(0.0, self.config.duration, TRAJECTORY_STEPS)

    def _run_episode(self, genotype):
        cfg = self.config
        g = as_float_array(genotype, "genotype")
        n = len(cfg.link_lengths)
        if g.shape != (2 * n,):
            raise ValueError(f"genotype must have length {2 * n}, got {g.shape}")
        check_in_bounds(g, self.lower_bounds, self.upper_bounds, "genotype")
        return _episode(
            np.ascontiguousarray(g[:n]), np.ascontiguousarray(g[n:]),
            self._lengths, cfg.base[0], cfg.base[1], cfg.base_orientation,
            cfg.puck_start[0], cfg.puck_start[1], cfg.puck_radius,
            cfg.friction, cfg.wall_restitution, cfg.side,
            cfg.motion_steps, cfg.total_steps, cfg.micro_dt,
        )

    def _resample(self, micro_positions):
        i0 = self._interp_idx
        w = self._interp_w[:, None]
        return micro_positions[i0] * (1.0 - w) + micro_positions[i0 + 1] * w

    def simulate(self, genotype, return_events=False):
        """Puck trajectory (50, 2); optionally also the wall-bounce events."""
        pos, events, n_ev = self._run_episode(genotype)
        traj = self._resample(pos)
        if return_events:
            return traj, events[:n_ev].copy()
        return traj

    def micro_positions(self, genotype):
        """Full per-micro-step puck positions, shape (total_steps + 1, 2)."""
        pos, _, _ = self._run_episode(genotype)
        return pos

    def simulate_batch(self, genotypes):
        g = check_matrix(genotypes, n_cols=self.genotype_dim, name="genotypes")
        out = np.empty((g.shape[0], TRAJECTORY_STEPS, 2))
        for b in range(g.shape[0]):
            out[b] = self.simulate(g[b])
        return out

    def ground_truth_batch(self, genotypes, trajectories=None):
        """Final puck position, shape (B, 2)."""
        if trajectories is None:
            trajectories = self.simulate_batch(genotypes)
        trajs = as_float_array(trajectories, "trajectories")
        return trajs[:, -1, :].copy()

    def metric_bounds(self):
        """Arena bounds used to bin puck positions, shape (2, 2)."""
        return np.array([[0.0, self.config.side], [0.0, self.config.side]])

    def sensory_bounds(self):
        """Physical bounds of each sensory dimension, shape (2, 100).

        The puck centre always stays between the walls, radius included.
        """
        cfg = self.config
        lower = np.full(2 * TRAJECTORY_STEPS, cfg.puck_radius)
        upper = np.full(2 * TRAJECTORY_STEPS, cfg.side - cfg.puck_radius)
        return np.stack([lower, upper])

    def prior_genotypes(self, n_samples=10000):
        raise ValueError("no prior genotype grid is defined for the air-hockey task")

    def sensory_batch(self, genotypes):
        return flatten_batch(self.simulate_batch(genotypes))
