"""Differential-drive kinematics: actions, velocity limits, state propagation.

The ego-agent admits only forward linear velocity and yaw rate (no lateral
motion). State updates are explicit Euler over one planning period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Pose2, Vec2, normalize_angle


@dataclass(frozen=True)
class NavAction:
    """Commanded (linear, angular) velocity pair in m/s and rad/s."""

    v: float
    w: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.w)):
            raise ValueError(f"non-finite action ({self.v}, {self.w})")


STOP_ACTION = NavAction(0.0, 0.0)


@dataclass(frozen=True)
class KinematicLimits:
    """Velocity bounds and planning period for the ego-agent."""

    v_max: float = 0.5
    w_max: float = 1.0
    dt: float = 0.2

    def __post_init__(self) -> None:
        if self.v_max <= 0.0 or self.w_max <= 0.0 or self.dt <= 0.0:
            raise ValueError("v_max, w_max, and dt must all be positive")

    def clamp(self, action: NavAction) -> NavAction:
        """Clamp an action into [0, v_max] x [-w_max, w_max].

        Out-of-range commands are clamped rather than rejected, mirroring a
        real velocity controller fed by an arbitrary policy.
        """
        v = min(max(action.v, 0.0), self.v_max)
        w = min(max(action.w, -self.w_max), self.w_max)
        if v == action.v and w == action.w:
            return action
        return NavAction(v, w)


def step_differential(state: Pose2, action: NavAction, dt: float) -> Pose2:
    """Advance a pose by one explicit Euler step of the differential-drive model.

    x' = x + v*cos(theta)*dt, y' = y + v*sin(theta)*dt, theta' = theta + w*dt,
    with the heading re-normalized. Deliberately no arc correction: the
    transition model is the discrete Euler update itself.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    c, s = math.cos(state.heading), math.sin(state.heading)
    return Pose2(
        Vec2(state.position.x + action.v * c * dt, state.position.y + action.v * s * dt),
        normalize_angle(state.heading + action.w * dt),
    )


def clip_action(raw: NavAction, threshold: float) -> NavAction:
    """Zero the whole command when the linear part is below threshold.

    Low-speed crawl plus in-place rotation is replaced by a full stop; the
    boundary v == threshold passes through unchanged.
    """
    if threshold < 0.0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if raw.v < threshold:
        return STOP_ACTION
    return raw
