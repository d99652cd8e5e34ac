"""Shared trajectory conventions for the simulated tasks.

Every task produces a planar trajectory resampled to exactly
``TRAJECTORY_STEPS`` points; the flattened (x, y) sequence is the raw
sensory vector consumed by the descriptor extractors.
"""

from __future__ import annotations

import numpy as np

from ..validation import as_float_array

TRAJECTORY_STEPS = 50
SENSORY_DIM = 2 * TRAJECTORY_STEPS


def sensory_vector(trajectory):
    """Flatten a (50, 2) trajectory into a length-100 sensory vector."""
    traj = as_float_array(trajectory, "trajectory")
    if traj.shape != (TRAJECTORY_STEPS, 2):
        raise ValueError(f"trajectory must have shape (50, 2), got {traj.shape}")
    return traj.reshape(SENSORY_DIM).copy()


def trajectory_from_sensory(vector):
    """Inverse of :func:`sensory_vector`."""
    vec = as_float_array(vector, "sensory vector")
    if vec.shape != (SENSORY_DIM,):
        raise ValueError(f"sensory vector must have length {SENSORY_DIM}")
    return vec.reshape(TRAJECTORY_STEPS, 2).copy()


def flatten_batch(trajectories):
    """Reshape a (B, 50, 2) trajectory batch into (B, 100) sensory rows."""
    trajs = as_float_array(trajectories, "trajectories")
    if trajs.ndim != 3 or trajs.shape[1:] != (TRAJECTORY_STEPS, 2):
        raise ValueError(f"expected shape (B, 50, 2), got {trajs.shape}")
    return trajs.reshape(trajs.shape[0], SENSORY_DIM)
