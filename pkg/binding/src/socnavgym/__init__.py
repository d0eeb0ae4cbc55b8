"""Gym-style episodic binding for the socnavsim engine.

Exposes reset/step in the widely used shape -- ``reset(seed)`` returns the
observation, ``step(action)`` returns ``(observation, reward, terminated,
truncated, info)`` -- with observations flattened to float32 arrays, the
convention of RL training stacks. The engine itself computes in float64; the
float32 cast at this boundary is the only permitted divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from socnavsim.env import Observation, SocialNavEnv
from socnavsim.kinematics import NavAction
from socnavsim.reward import Terminal
from socnavsim.scenario import ScenarioConfig, load_scenario

__version__ = "0.1.0"

__all__ = ["BoundObservation", "SocNavGymEnv", "make_env"]


@dataclass(frozen=True)
class BoundObservation:
    """Flat float32 view of one native observation.

    scan_stack is row-major with the oldest scan first (K*N values, the last
    N of which are the newest raw sweep); goal_polar is (distance, bearing) in
    the ego frame; prev_action is the last executed (v, w).
    """

    scan_stack: np.ndarray
    goal_polar: np.ndarray
    prev_action: np.ndarray


def _bind(observation: Observation) -> BoundObservation:
    return BoundObservation(
        scan_stack=observation.scan_stack.values.astype(np.float32).reshape(-1),
        goal_polar=np.asarray(observation.goal_polar, dtype=np.float32),
        prev_action=np.asarray(
            [observation.prev_action.v, observation.prev_action.w], dtype=np.float32
        ),
    )


class SocNavGymEnv:
    """One native environment instance behind the episodic API.

    A handle is confined to one thread; create one handle per concurrent
    rollout. ``terminated`` covers goal arrival and collision; ``truncated``
    covers the episode timeout.
    """

    def __init__(self, config: ScenarioConfig | None = None, **env_kwargs):
        self._env = SocialNavEnv(config, **env_kwargs)
        limits = self._env.limits
        self.action_low = np.array([0.0, -limits.w_max], dtype=np.float32)
        self.action_high = np.array([limits.v_max, limits.w_max], dtype=np.float32)

    @property
    def observation_size(self) -> int:
        return self._env.stack_depth * self._env.n_beams + 4

    def reset(self, seed: int | None = None) -> BoundObservation:
        return _bind(self._env.reset(seed))

    def step(self, action) -> tuple[BoundObservation, float, bool, bool, dict]:
        v, w = (float(x) for x in np.asarray(action, dtype=float).reshape(2))
        result = self._env.step(NavAction(v, w))
        terminated = result.terminal in (Terminal.ARRIVAL, Terminal.COLLISION)
        truncated = result.terminal is Terminal.TIMEOUT
        info = dict(result.info)
        info["terminal"] = result.terminal.value
        return _bind(result.observation), result.reward, terminated, truncated, info


def make_env(config_path: str | Path | None = None, **env_kwargs) -> SocNavGymEnv:
    """Build a handle from a scenario config file (engine defaults when None).

    Raises FileNotFoundError for a missing file and the engine's ConfigError
    naming the offending key for an invalid one.
    """
    if config_path is None:
        return SocNavGymEnv(None, **env_kwargs)
    config, reward = load_scenario(config_path)
    return SocNavGymEnv(config, reward_params=reward, **env_kwargs)
