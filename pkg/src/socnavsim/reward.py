"""Four-case navigation reward and the angular-smoothness penalty.

Per step the agent is in exactly one of four scenarios, checked in this
order: goal arrival (terminal bonus), collision (terminal penalty),
discomfort (inside the annulus of width r_dis around the body, penalized but
not terminal), or open space. The two non-terminal cases share a goal
progress term proportional to the decrease in goal distance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Terminal(str, enum.Enum):
    """How (or whether) an episode step ended the episode."""

    NONE = "none"
    ARRIVAL = "arrival"
    COLLISION = "collision"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RewardParams:
    r_robot: float = 0.3
    r_dis: float = 0.5
    w_dis: float = 0.4
    w_goal: float = 1.4
    w_ang: float = 0.01
    terminal_bonus: float = 0.5
    collision_penalty: float = -0.5

    def __post_init__(self) -> None:
        if self.r_robot <= 0.0 or self.r_dis <= 0.0:
            raise ValueError("r_robot and r_dis must be positive")
        for name in ("w_dis", "w_goal", "w_ang", "terminal_bonus", "collision_penalty"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class RewardInputs:
    """Distances and angular rates the reward depends on.

    d_min is the minimum of the current raw scan (not of the transformed
    history); d_goal_prev/d_goal bracket the step just taken.
    """

    d_goal_prev: float
    d_goal: float
    d_min: float
    w_prev: float = 0.0
    w_now: float = 0.0

    def __post_init__(self) -> None:
        if min(self.d_goal_prev, self.d_goal, self.d_min) < 0.0:
            raise ValueError("distances must be non-negative")


def nav_reward(inputs: RewardInputs, params: RewardParams) -> tuple[float, Terminal]:
    """Reward value and terminal classification for one step.

    Branch precedence is fixed: arrival dominates collision dominates
    discomfort dominates open space. The discomfort term vanishes continuously
    at d_min == r_robot + r_dis.
    """
    if inputs.d_goal <= params.r_robot:
        return params.terminal_bonus, Terminal.ARRIVAL
    if inputs.d_min <= params.r_robot:
        return params.collision_penalty, Terminal.COLLISION
    goal_term = params.w_goal * (inputs.d_goal_prev - inputs.d_goal)
    if inputs.d_min <= params.r_robot + params.r_dis:
        discomfort = params.w_dis * (inputs.d_min - params.r_robot - params.r_dis)
        return discomfort + goal_term, Terminal.NONE
    return goal_term, Terminal.NONE


def angular_penalty(w_prev: float, w_now: float, w_ang: float = 0.01) -> float:
    """Penalty for abrupt angular-velocity changes: -w_ang * |w_now - w_prev|."""
    return -w_ang * abs(w_now - w_prev)
