"""socnavsim: deterministic 2D social-navigation simulation and planning.

Differential-drive ego-agent among ORCA-driven pedestrians and circular
obstacles, sensed by a simulated 360-degree LiDAR whose historical scans are
re-projected into the current ego frame. Ships classical baseline planners
(DWA, ORCA-as-ego) and a seeded benchmark harness producing SR/CR/TR/NT.
"""

from .bench import MetricsReport, TrialOutcome, run_benchmark
from .crowd import CrowdState, EgoBody, PedestrianState, step_crowd
from .env import (
    EpisodeStateError,
    EpisodeTrace,
    Observation,
    PolicyError,
    ScenarioGenerationError,
    SceneView,
    SocialNavEnv,
    StepResult,
    run_episode,
)
from .geometry import (
    Circle,
    Pose2,
    Vec2,
    frame_to_world,
    normalize_angle,
    ray_circle_hit,
    rotate,
    world_to_frame,
)
from .kinematics import KinematicLimits, NavAction, clip_action, step_differential
from .lidar import (
    LidarScan,
    ScanStack,
    TransformedStack,
    build_observation,
    cast_scan,
    reproject_scan,
    scan_points_local,
)
from .orca import AgentDisc, OrcaParams, orca_velocity
from .planners import (
    DwaParams,
    DwaPolicy,
    OrcaPolicy,
    StraightPolicy,
    ZeroPolicy,
    dwa_plan,
    make_policy,
    orca_ego_plan,
)
from .reward import RewardInputs, RewardParams, Terminal, angular_penalty, nav_reward
from .scenario import ConfigError, ScenarioConfig, config_digest, load_scenario, save_scenario

__version__ = "0.1.0"

__all__ = [
    "AgentDisc",
    "Circle",
    "ConfigError",
    "CrowdState",
    "DwaParams",
    "DwaPolicy",
    "EgoBody",
    "EpisodeStateError",
    "EpisodeTrace",
    "KinematicLimits",
    "LidarScan",
    "MetricsReport",
    "NavAction",
    "Observation",
    "OrcaParams",
    "OrcaPolicy",
    "PedestrianState",
    "PolicyError",
    "Pose2",
    "RewardInputs",
    "RewardParams",
    "ScanStack",
    "ScenarioConfig",
    "ScenarioGenerationError",
    "SceneView",
    "SocialNavEnv",
    "StepResult",
    "StraightPolicy",
    "Terminal",
    "TransformedStack",
    "TrialOutcome",
    "Vec2",
    "ZeroPolicy",
    "angular_penalty",
    "build_observation",
    "cast_scan",
    "clip_action",
    "config_digest",
    "dwa_plan",
    "frame_to_world",
    "load_scenario",
    "make_policy",
    "nav_reward",
    "normalize_angle",
    "orca_ego_plan",
    "orca_velocity",
    "ray_circle_hit",
    "reproject_scan",
    "rotate",
    "run_benchmark",
    "run_episode",
    "save_scenario",
    "scan_points_local",
    "step_crowd",
    "step_differential",
    "world_to_frame",
]
