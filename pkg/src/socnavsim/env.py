"""Episode engine: seeded scenario randomization and the observe-act-step loop.

One environment instance owns one episode at a time: reset samples a scenario
from a seeded generator (actor counts, placements, sizes, goals), then step
advances the world at a fixed planning period (ego first, then pedestrians,
then sensing) and classifies the step as arrival / collision / timeout /
none. Everything downstream of the seed is deterministic, so equal
(config, seed, policy) triples replay bit-identically.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .crowd import (
    PEDESTRIAN_RADIUS,
    PEDESTRIAN_SPEED_RANGE,
    CrowdState,
    EgoBody,
    PedestrianState,
    step_crowd,
)
from .geometry import Circle, Pose2, Vec2, normalize_angle
from .kinematics import STOP_ACTION, KinematicLimits, NavAction, clip_action, step_differential
from .lidar import (
    DEFAULT_MAX_RANGE,
    N_BEAMS,
    STACK_DEPTH,
    ScanStack,
    TransformedStack,
    build_observation,
    cast_scan,
)
from .orca import OrcaParams
from .reward import RewardInputs, RewardParams, Terminal, angular_penalty, nav_reward
from .scenario import ScenarioConfig

CLIP_THRESHOLD = 0.3
SPAWN_CLEARANCE = 0.2
MAX_PLACEMENT_ATTEMPTS = 10_000
REGOAL_MIN_DISTANCE = 1.0


class ScenarioGenerationError(RuntimeError):
    """Rejection sampling could not satisfy a spawn constraint."""


class EpisodeStateError(RuntimeError):
    """The episode was driven past a terminal step without a reset."""


class PolicyError(RuntimeError):
    """A policy raised while choosing an action; carries the step index."""


@dataclass(frozen=True)
class Observation:
    """What a sensing-only policy gets: scans, goal in the ego frame, last action."""

    scan_stack: TransformedStack
    goal_polar: tuple[float, float]
    prev_action: NavAction


@dataclass(frozen=True)
class SceneView:
    """Privileged ground-truth snapshot for model-based planners.

    pedestrians pairs each body disc with its current velocity.
    """

    ego_pose: Pose2
    ego_velocity: Vec2
    ego_radius: float
    goal: Vec2
    obstacles: tuple[Circle, ...]
    pedestrians: tuple[tuple[Circle, Vec2], ...]
    limits: KinematicLimits


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    terminal: Terminal
    info: dict


class Policy(Protocol):
    def __call__(self, observation: Observation, scene: SceneView) -> NavAction: ...


@dataclass(frozen=True)
class TraceStep:
    t: int
    ego: Pose2
    pedestrians: tuple[Vec2, ...]
    action: NavAction
    reward: float
    terminal: Terminal


@dataclass
class EpisodeTrace:
    """Per-step record of one episode plus its static scene and summary."""

    steps: list[TraceStep]
    terminal: Terminal
    nav_time_s: float
    min_separation: float
    seed: int
    goal: Vec2
    obstacles: tuple[Circle, ...]
    dt: float

    @property
    def n_steps(self) -> int:
        return len(self.steps) - 1

    def to_jsonl(self) -> str:
        lines = []
        for step in self.steps:
            lines.append(
                json.dumps(
                    {
                        "t": step.t,
                        "ego": [step.ego.position.x, step.ego.position.y, step.ego.heading],
                        "peds": [[p.x, p.y] for p in step.pedestrians],
                        "action": [step.action.v, step.action.w],
                        "reward": step.reward,
                        "terminal": step.terminal.value,
                    }
                )
            )
        summary = {
            "summary": {
                "terminal": self.terminal.value,
                "steps": self.n_steps,
                "nav_time_s": self.nav_time_s,
                "scene": {
                    "obstacles": [[c.center.x, c.center.y, c.radius] for c in self.obstacles],
                    "goal": [self.goal.x, self.goal.y],
                    "seed": self.seed,
                },
            }
        }
        lines.append(json.dumps(summary))
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())


class SocialNavEnv:
    """Deterministic social-navigation episode simulator.

    One instance is single-threaded and owns one episode at a time; separate
    instances are fully independent and safe to run in parallel.
    """

    def __init__(
        self,
        config: ScenarioConfig | None = None,
        *,
        limits: KinematicLimits | None = None,
        reward_params: RewardParams | None = None,
        orca_params: OrcaParams | None = None,
        max_range: float = DEFAULT_MAX_RANGE,
        n_beams: int = N_BEAMS,
        stack_depth: int = STACK_DEPTH,
        clip_threshold: float = CLIP_THRESHOLD,
    ) -> None:
        self.config = config or ScenarioConfig()
        self.limits = limits or KinematicLimits()
        self.reward_params = reward_params or RewardParams()
        self.orca_params = orca_params or OrcaParams(dt=self.limits.dt)
        self.max_range = max_range
        self.n_beams = n_beams
        self.stack_depth = stack_depth
        self.clip_threshold = clip_threshold

        self._rng: np.random.Generator | None = None
        self._terminal = Terminal.NONE
        self._started = False

    # -- scenario sampling ---------------------------------------------------

    def reset(self, seed: int | None = None) -> Observation:
        """Sample a fresh scenario and return the first observation.

        The draw order from the seeded generator is fixed: obstacle count,
        pedestrian count, ego start/goal (redrawn as a pair until separated),
        then per obstacle (radius, center) with rejection, optional obstacle
        position noise, then per pedestrian: position with rejection, goal,
        preferred speed.
        """
        cfg = self.config
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        self._seed = cfg.seed if seed is None else seed
        self._rng = rng
        he = cfg.arena_half_extent
        r_ego = self.reward_params.r_robot

        n_obstacles = int(rng.integers(cfg.n_obstacles_range[0], cfg.n_obstacles_range[1] + 1))
        n_pedestrians = int(
            rng.integers(cfg.n_pedestrians_range[0], cfg.n_pedestrians_range[1] + 1)
        )

        margin = 0.5
        lo, hi = -he + margin, he - margin
        if hi <= lo:
            raise ScenarioGenerationError("arena too small for the spawn margin")
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            start = rng.uniform(lo, hi, 2)
            goal = rng.uniform(lo, hi, 2)
            if np.hypot(*(goal - start)) >= cfg.goal_min_distance:
                break
        else:
            raise ScenarioGenerationError(
                f"could not separate ego start and goal by {cfg.goal_min_distance} m"
            )
        start_v = Vec2(float(start[0]), float(start[1]))
        goal_v = Vec2(float(goal[0]), float(goal[1]))
        heading = math.atan2(goal_v.y - start_v.y, goal_v.x - start_v.x)

        obstacles: list[Circle] = []
        for index in range(n_obstacles):
            for _ in range(MAX_PLACEMENT_ATTEMPTS):
                radius = float(rng.uniform(*cfg.obstacle_radius_range))
                center = rng.uniform(-he + radius, he - radius, 2)
                c = Vec2(float(center[0]), float(center[1]))
                if (c - start_v).norm() < radius + r_ego + SPAWN_CLEARANCE:
                    continue
                if (c - goal_v).norm() < radius + r_ego + SPAWN_CLEARANCE:
                    continue
                if any((c - o.center).norm() < radius + o.radius for o in obstacles):
                    continue
                obstacles.append(Circle(c, radius))
                break
            else:
                raise ScenarioGenerationError(
                    f"could not place obstacle {index} without overlap"
                )
        if cfg.noise_enabled and n_obstacles > 0:
            offsets = rng.uniform(
                -cfg.obstacle_position_noise, cfg.obstacle_position_noise, (n_obstacles, 2)
            )
            obstacles = [
                Circle(Vec2(o.center.x + float(d[0]), o.center.y + float(d[1])), o.radius)
                for o, d in zip(obstacles, offsets)
            ]

        p_lo, p_hi = -he + PEDESTRIAN_RADIUS, he - PEDESTRIAN_RADIUS
        pedestrians: list[PedestrianState] = []
        for index in range(n_pedestrians):
            for _ in range(MAX_PLACEMENT_ATTEMPTS):
                pos = rng.uniform(p_lo, p_hi, 2)
                p = Vec2(float(pos[0]), float(pos[1]))
                if (p - start_v).norm() < PEDESTRIAN_RADIUS + r_ego + SPAWN_CLEARANCE:
                    continue
                if any(
                    (p - o.center).norm() < PEDESTRIAN_RADIUS + o.radius for o in obstacles
                ):
                    continue
                if any(
                    (p - q.position).norm() < 2 * PEDESTRIAN_RADIUS for q in pedestrians
                ):
                    continue
                break
            else:
                raise ScenarioGenerationError(
                    f"could not place pedestrian {index} without overlap"
                )
            ped_goal = self._sample_pedestrian_goal(obstacles)
            speed = float(rng.uniform(*PEDESTRIAN_SPEED_RANGE))
            pedestrians.append(
                PedestrianState(
                    position=p,
                    velocity=Vec2(0.0, 0.0),
                    radius=PEDESTRIAN_RADIUS,
                    preferred_speed=speed,
                    goal=ped_goal,
                )
            )

        self._pose = Pose2(start_v, heading)
        self._goal = goal_v
        self._obstacles = tuple(obstacles)
        self._crowd = CrowdState(pedestrians=pedestrians, rng=rng)
        self._ego_velocity = Vec2(0.0, 0.0)
        self._prev_action = STOP_ACTION
        self._d_goal_prev = (goal_v - start_v).norm()
        self._steps = 0
        self._terminal = Terminal.NONE
        self._started = True

        self._stack = ScanStack(depth=self.stack_depth)
        scan = cast_scan(self._pose, self._bodies(), self.max_range, self.n_beams)
        self._stack.push(scan)
        return self._observation(scan)

    # -- stepping ------------------------------------------------------------

    def step(self, action: NavAction) -> StepResult:
        """Advance one planning period; raises EpisodeStateError once terminal."""
        if not self._started:
            raise EpisodeStateError("step() before reset()")
        if self._terminal is not Terminal.NONE:
            raise EpisodeStateError(f"episode already terminal ({self._terminal.value})")

        executed = self.limits.clamp(action)
        if self.config.unified_mode:
            executed = clip_action(executed, self.clip_threshold)

        old_pose = self._pose
        self._pose = step_differential(old_pose, executed, self.limits.dt)

        # pedestrians see the moved ego but gate on its pre-step realized motion
        ego_body = EgoBody(
            pose=self._pose, velocity=self._ego_velocity, radius=self.reward_params.r_robot
        )
        noise = self.config.pedestrian_velocity_noise if self.config.noise_enabled else 0.0
        self._crowd = step_crowd(
            self._crowd, ego_body, list(self._obstacles), self.limits.dt, noise, self.orca_params
        )
        self._regoal_arrived_pedestrians()
        self._ego_velocity = (self._pose.position - old_pose.position) * (1.0 / self.limits.dt)

        scan = cast_scan(self._pose, self._bodies(), self.max_range, self.n_beams)
        self._stack.push(scan)

        d_goal = (self._goal - self._pose.position).norm()
        d_min = float(scan.ranges.min())
        inputs = RewardInputs(
            d_goal_prev=self._d_goal_prev,
            d_goal=d_goal,
            d_min=d_min,
            w_prev=self._prev_action.w,
            w_now=executed.w,
        )
        reward, terminal = nav_reward(inputs, self.reward_params)
        if self.config.unified_mode:
            reward += angular_penalty(inputs.w_prev, inputs.w_now, self.reward_params.w_ang)

        self._steps += 1
        if terminal is Terminal.NONE and self._steps >= self.config.timeout_steps:
            terminal = Terminal.TIMEOUT
        self._terminal = terminal
        self._d_goal_prev = d_goal
        self._prev_action = executed

        info = {
            "step": self._steps,
            "d_goal": d_goal,
            "d_min": d_min,
            "min_separation": self._min_separation(),
        }
        return StepResult(self._observation(scan, executed), reward, terminal, info)

    def _sample_pedestrian_goal(
        self, obstacles: list[Circle] | tuple[Circle, ...], away_from: Vec2 | None = None
    ) -> Vec2:
        """Pedestrian waypoint clear of obstacles (an unreachable goal would
        park the pedestrian against an obstacle for the whole episode)."""
        assert self._rng is not None
        he = self.config.arena_half_extent
        p_lo, p_hi = -he + PEDESTRIAN_RADIUS, he - PEDESTRIAN_RADIUS
        keep_out = PEDESTRIAN_RADIUS + self.orca_params.safety_margin + 0.05
        goal = Vec2(0.0, 0.0)
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            cand = self._rng.uniform(p_lo, p_hi, 2)
            goal = Vec2(float(cand[0]), float(cand[1]))
            if any((goal - o.center).norm() < o.radius + keep_out for o in obstacles):
                continue
            if away_from is not None and (goal - away_from).norm() < REGOAL_MIN_DISTANCE:
                continue
            return goal
        return goal

    def _regoal_arrived_pedestrians(self) -> None:
        """Give pedestrians that reached their goal a fresh one (scene stays alive)."""
        peds = self._crowd.pedestrians
        for i, ped in enumerate(peds):
            if (ped.goal - ped.position).norm() > ped.preferred_speed * self.limits.dt:
                continue
            goal = self._sample_pedestrian_goal(self._obstacles, away_from=ped.position)
            peds[i] = PedestrianState(
                position=ped.position,
                velocity=ped.velocity,
                radius=ped.radius,
                preferred_speed=ped.preferred_speed,
                goal=goal,
            )

    # -- views ---------------------------------------------------------------

    def _bodies(self) -> list[Circle]:
        return list(self._obstacles) + [p.body() for p in self._crowd.pedestrians]

    def _observation(self, scan, prev_action: NavAction | None = None) -> Observation:
        stack = build_observation(self._stack, self._pose)
        to_goal = self._goal - self._pose.position
        r_goal = to_goal.norm()
        theta_goal = normalize_angle(math.atan2(to_goal.y, to_goal.x) - self._pose.heading)
        return Observation(
            scan_stack=stack,
            goal_polar=(r_goal, theta_goal),
            prev_action=prev_action if prev_action is not None else self._prev_action,
        )

    def _min_separation(self) -> float:
        """Surface-to-surface gap between the ego and the nearest body."""
        pos = self._pose.position
        r_ego = self.reward_params.r_robot
        gaps = [
            (c.center - pos).norm() - c.radius - r_ego for c in self._bodies()
        ]
        return min(gaps) if gaps else math.inf

    def scene_view(self) -> SceneView:
        return SceneView(
            ego_pose=self._pose,
            ego_velocity=self._ego_velocity,
            ego_radius=self.reward_params.r_robot,
            goal=self._goal,
            obstacles=self._obstacles,
            pedestrians=tuple((p.body(), p.velocity) for p in self._crowd.pedestrians),
            limits=self.limits,
        )

    def scene_digest(self) -> str:
        """Hash of the spawned layout; equal digests mean identical scenarios."""
        parts = [
            repr((self._pose.position.x, self._pose.position.y, self._pose.heading)),
            repr((self._goal.x, self._goal.y)),
        ]
        parts += [repr((o.center.x, o.center.y, o.radius)) for o in self._obstacles]
        parts += [
            repr(
                (
                    p.position.x,
                    p.position.y,
                    p.goal.x,
                    p.goal.y,
                    p.preferred_speed,
                )
            )
            for p in self._crowd.pedestrians
        ]
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]

    @property
    def ego_pose(self) -> Pose2:
        return self._pose

    @property
    def goal(self) -> Vec2:
        return self._goal

    @property
    def obstacles(self) -> tuple[Circle, ...]:
        return self._obstacles

    @property
    def pedestrians(self) -> list[PedestrianState]:
        return self._crowd.pedestrians

    @property
    def terminal(self) -> Terminal:
        return self._terminal

    @property
    def step_index(self) -> int:
        return self._steps


def run_episode(
    config: ScenarioConfig,
    seed: int,
    policy: Policy | Callable[[Observation, SceneView], NavAction],
    *,
    limits: KinematicLimits | None = None,
    reward_params: RewardParams | None = None,
    orca_params: OrcaParams | None = None,
) -> EpisodeTrace:
    """Run one full episode under a policy and record its trace."""
    env = SocialNavEnv(
        config, limits=limits, reward_params=reward_params, orca_params=orca_params
    )
    obs = env.reset(seed)
    steps = [
        TraceStep(
            t=0,
            ego=env.ego_pose,
            pedestrians=tuple(p.position for p in env.pedestrians),
            action=STOP_ACTION,
            reward=0.0,
            terminal=Terminal.NONE,
        )
    ]
    min_separation = math.inf
    terminal = Terminal.NONE
    t = 0
    while terminal is Terminal.NONE:
        t += 1
        try:
            action = policy(obs, env.scene_view())
        except Exception as exc:
            raise PolicyError(f"policy failed at step {t}: {exc}") from exc
        result = env.step(action)
        obs = result.observation
        terminal = result.terminal
        min_separation = min(min_separation, result.info["min_separation"])
        steps.append(
            TraceStep(
                t=t,
                ego=env.ego_pose,
                pedestrians=tuple(p.position for p in env.pedestrians),
                action=result.observation.prev_action,
                reward=result.reward,
                terminal=terminal,
            )
        )
    return EpisodeTrace(
        steps=steps,
        terminal=terminal,
        nav_time_s=t * env.limits.dt,
        min_separation=min_separation,
        seed=seed,
        goal=env.goal,
        obstacles=env.obstacles,
        dt=env.limits.dt,
    )
