"""Simulated tasks producing planar trajectories for descriptor learning."""

from .airhockey import AirHockeyTask, ArenaConfig, forward_kinematics
from .ballistic import BallisticConfig, BallisticTask, bounce_height_reference
from .base import (
    SENSORY_DIM,
    TRAJECTORY_STEPS,
    flatten_batch,
    sensory_vector,
    trajectory_from_sensory,
)

TASKS = {
    BallisticTask.name: BallisticTask,
    AirHockeyTask.name: AirHockeyTask,
}

__all__ = [
    "AirHockeyTask",
    "ArenaConfig",
    "BallisticConfig",
    "BallisticTask",
    "SENSORY_DIM",
    "TASKS",
    "TRAJECTORY_STEPS",
    "bounce_height_reference",
    "flatten_batch",
    "forward_kinematics",
    "sensory_vector",
    "trajectory_from_sensory",
]
