"""Scenario configuration: randomization ranges, episode limits, JSON I/O.

The JSON file schema mirrors the config field names one-to-one (snake_case
keys); the single extension is an optional "reward" object holding reward
parameters. Any other unknown key is rejected, since a silently ignored typo
in a benchmark config corrupts results.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .reward import RewardParams


class ConfigError(ValueError):
    """Scenario configuration file or value is invalid."""


@dataclass(frozen=True)
class ScenarioConfig:
    arena_half_extent: float = 5.0
    n_obstacles_range: tuple[int, int] = (2, 4)
    n_pedestrians_range: tuple[int, int] = (3, 5)
    obstacle_radius_range: tuple[float, float] = (0.2, 0.8)
    obstacle_position_noise: float = 0.03
    pedestrian_velocity_noise: float = 0.15
    goal_min_distance: float = 6.0
    timeout_steps: int = 200
    seed: int = 0
    unified_mode: bool = False
    noise_enabled: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_obstacles_range", tuple(self.n_obstacles_range))
        object.__setattr__(self, "n_pedestrians_range", tuple(self.n_pedestrians_range))
        object.__setattr__(self, "obstacle_radius_range", tuple(self.obstacle_radius_range))
        if self.arena_half_extent <= 0.0:
            raise ConfigError("arena_half_extent must be positive")
        for name in ("n_obstacles_range", "n_pedestrians_range", "obstacle_radius_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name} must be ordered [min, max], got {(lo, hi)}")
        if self.n_obstacles_range[0] < 0 or self.n_pedestrians_range[0] < 0:
            raise ConfigError("counts must be non-negative")
        if self.obstacle_radius_range[0] <= 0.0:
            raise ConfigError("obstacle radii must be positive")
        if self.obstacle_position_noise < 0.0 or self.pedestrian_velocity_noise < 0.0:
            raise ConfigError("noise magnitudes must be non-negative")
        if self.goal_min_distance < 0.0:
            raise ConfigError("goal_min_distance must be non-negative")
        if self.timeout_steps <= 0:
            raise ConfigError("timeout_steps must be positive")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("n_obstacles_range", "n_pedestrians_range", "obstacle_radius_range"):
            out[key] = list(out[key])
        return out


def config_from_dict(data: dict) -> tuple[ScenarioConfig, RewardParams]:
    """Build (scenario, reward params) from a parsed JSON object."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    data = dict(data)
    reward_block = data.pop("reward", None)
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    try:
        config = ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    reward = RewardParams()
    if reward_block is not None:
        if not isinstance(reward_block, dict):
            raise ConfigError("'reward' must be a JSON object")
        reward_known = {f.name for f in dataclasses.fields(RewardParams)}
        bad = sorted(set(reward_block) - reward_known)
        if bad:
            raise ConfigError(f"unknown reward key(s): {', '.join(bad)}")
        try:
            reward = RewardParams(**reward_block)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid reward block: {exc}") from exc
    return config, reward


def load_scenario(path: str | Path) -> tuple[ScenarioConfig, RewardParams]:
    """Load a scenario config file; raises ConfigError with the offending key."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_scenario(config: ScenarioConfig, path: str | Path, reward: RewardParams | None = None) -> None:
    data = config.to_dict()
    if reward is not None:
        data["reward"] = dataclasses.asdict(reward)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def config_digest(config: ScenarioConfig, reward: RewardParams | None = None) -> str:
    """Stable hash identifying a scenario distribution (and reward shaping)."""
    payload = {"config": config.to_dict()}
    if reward is not None:
        payload["reward"] = dataclasses.asdict(reward)
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
