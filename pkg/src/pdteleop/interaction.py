"""Operator and environment forces, and the task-to-joint torque map.

Both agents act along the task-space y axis only.  The operator applies an
open-loop biased sinusoid that switches off at stop_time; the environment
is a spring-damper wall engaged during penetration (y > wall position),
with no extra clamping of pull forces during withdrawal.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import RobotParams, jacobian
from .errors import InvalidInputError

__all__ = [
    "OperatorProfile",
    "WallEnvironment",
    "operator_force",
    "environment_force",
    "to_joint_torques",
]


@dataclass(frozen=True)
class OperatorProfile:
    amplitude: float = 4.0
    bias: float = 1.0
    angular_freq: float = np.pi / 20.0
    stop_time: float = 40.0

    def __post_init__(self):
        if not np.isfinite([self.amplitude, self.bias, self.angular_freq,
                            self.stop_time]).all():
            raise InvalidInputError("operator profile entries must be finite")

    def packed(self) -> np.ndarray:
        return np.array([self.amplitude, self.bias, self.angular_freq, self.stop_time])


@dataclass(frozen=True)
class WallEnvironment:
    stiffness: float = 1000.0
    damping: float = 100.0
    wall_y: float = 2.0

    def __post_init__(self):
        if self.stiffness < 0 or self.damping < 0:
            raise InvalidInputError("stiffness and damping must be nonnegative")

    def packed(self) -> np.ndarray:
        return np.array([self.stiffness, self.damping, self.wall_y])


def operator_force(profile: OperatorProfile, t: float) -> np.ndarray:
    """Task force (0, F_y) with F_y = amplitude sin(w t) + bias, zero after stop_time."""
    if t < 0:
        raise InvalidInputError("t must be nonnegative")
    fy = 0.0 if t >= profile.stop_time else (
        profile.amplitude * np.sin(profile.angular_freq * t) + profile.bias)
    return np.array([0.0, fy])


def environment_force(env: WallEnvironment, ee_pos, ee_vel) -> np.ndarray:
    """Wall reaction (0, F_y): spring-damper while penetrating, zero otherwise."""
    ee_pos = np.asarray(ee_pos, dtype=float)
    ee_vel = np.asarray(ee_vel, dtype=float)
    if not (np.isfinite(ee_pos).all() and np.isfinite(ee_vel).all()):
        raise InvalidInputError("end-effector state must be finite")
    y, ydot = ee_pos[1], ee_vel[1]
    fy = 0.0
    if y > env.wall_y:
        fy = -env.stiffness * (y - env.wall_y) - env.damping * ydot
    return np.array([0.0, fy])


def to_joint_torques(q, f_task, params: RobotParams) -> np.ndarray:
    """Joint torques J(q)^T f_task of a task-space force at the end effector."""
    f_task = np.asarray(f_task, dtype=float)
    return jacobian(q, params).T @ f_task
