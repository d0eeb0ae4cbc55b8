"""Classical baseline planners consuming privileged scene state.

DWA samples the feasible velocity grid, rolls each candidate out under
constant-velocity body extrapolation, discards colliding candidates, and
scores the survivors on goal progress, clearance, and speed. The ORCA-ego
planner solves the reciprocal-avoidance program with the ego as an agent and
projects the holonomic solution onto differential-drive commands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .env import Observation, SceneView
from .geometry import Circle, Vec2, normalize_angle
from .kinematics import KinematicLimits, NavAction
from .orca import AgentDisc, OrcaParams, orca_velocity

# admissibility never demands more clearance than a body currently grants,
# minus this slack, so recovery arcs survive a buffer incursion
RATCHET_SLACK = 0.02

ORCA_EGO_ANGULAR_GAIN = 2.0
ORCA_EGO_TIME_HORIZON = 5.0
ORCA_EGO_OBSTACLE_HORIZON = 2.0
ORCA_EGO_SAFETY_MARGIN = 0.2
ORCA_EGO_PED_MARGIN = 0.1


@dataclass(frozen=True)
class DwaParams:
    """Grid resolution, rollout horizon, and score weights.

    inflation widens the admissibility test: a candidate is discarded when its
    predicted separation drops below the combined radii plus this buffer,
    absorbing the constant-velocity extrapolation error of turning bodies.
    """

    v_samples: int = 11
    w_samples: int = 21
    horizon: float = 1.4
    w_heading: float = 1.0
    w_clearance: float = 0.8
    w_velocity: float = 0.3
    clearance_cap: float = 1.0
    inflation: float = 0.15

    def __post_init__(self) -> None:
        if self.v_samples < 2 or self.w_samples < 2:
            raise ValueError("need at least 2 samples per velocity axis")
        if self.horizon <= 0.0 or self.clearance_cap <= 0.0:
            raise ValueError("horizon and clearance_cap must be positive")
        if min(self.w_heading, self.w_clearance, self.w_velocity) < 0.0:
            raise ValueError("score weights must be non-negative")
        if self.inflation < 0.0:
            raise ValueError("inflation must be non-negative")


@dataclass(frozen=True)
class DwaDecision:
    """Full grid evaluation, exposed for auditing and the re-scoring oracle."""

    action: NavAction
    escaped: bool
    v_grid: np.ndarray
    w_grid: np.ndarray
    scores: np.ndarray
    admissible: np.ndarray


@lru_cache(maxsize=64)
def _dwa_grid(params: DwaParams, limits: KinematicLimits):
    """Pose-independent pieces of the candidate rollout.

    With constant (v, w) the Euler displacement factors through cumulative
    sums of cos/sin of the heading increments, so only two scalar rotations
    remain per plan call.
    """
    n_sub = max(1, int(round(params.horizon / limits.dt)))
    vs = np.repeat(np.linspace(0.0, limits.v_max, params.v_samples), params.w_samples)
    ws = np.tile(np.linspace(-limits.w_max, limits.w_max, params.w_samples), params.v_samples)
    increments = ws[:, None] * (np.arange(n_sub)[None, :] * limits.dt)
    cum_cos = np.cumsum(np.cos(increments), axis=1)
    cum_sin = np.cumsum(np.sin(increments), axis=1)
    times = (np.arange(n_sub) + 1) * limits.dt
    for arr in (vs, ws, cum_cos, cum_sin, times):
        arr.setflags(write=False)
    return vs, ws, cum_cos, cum_sin, times


def dwa_decide(
    ego_pose,
    ego_velocity: NavAction,
    goal: Vec2,
    bodies: list[tuple[Circle, Vec2]],
    ego_radius: float,
    params: DwaParams,
    limits: KinematicLimits,
    body_margins: list[float] | None = None,
) -> DwaDecision:
    """Evaluate the full candidate grid and pick the best admissible action.

    Candidates cover [0, v_max] x [-w_max, w_max] regardless of the current
    velocity (no acceleration limits apply to the ego). Each candidate is
    rolled out by Euler over the horizon with bodies extrapolated at constant
    velocity; a candidate whose center distance to any body ever drops below
    the combined radii is always discarded, and on top of that each body
    demands the inflation buffer plus its optional soft margin -- though never
    more clearance than the body currently grants (minus a small slack), so a
    buffer incursion cannot also veto the arcs recovering from it. Ties are
    broken by lower |w|, then lower grid index (v-major). With no admissible
    candidate the escape action is a pure in-place rotation toward the goal.
    """
    dt = limits.dt
    vs, ws, cum_cos, cum_sin, times = _dwa_grid(params, limits)

    x0, y0 = ego_pose.position.x, ego_pose.position.y
    th0 = ego_pose.heading
    c0, s0 = math.cos(th0), math.sin(th0)
    scale = vs[:, None] * dt
    xs = x0 + scale * (c0 * cum_cos - s0 * cum_sin)
    ys = y0 + scale * (s0 * cum_cos + c0 * cum_sin)

    if body_margins is None:
        body_margins = [0.0] * len(bodies)
    clearance = np.full(vs.shape, np.inf)
    admissible = np.ones(vs.shape, dtype=bool)
    for (circle, velocity), soft in zip(bodies, body_margins):
        bx = circle.center.x + velocity.x * times
        by = circle.center.y + velocity.y * times
        dx = xs - bx[None, :]
        dy = ys - by[None, :]
        dist_sq = dx * dx + dy * dy
        combined = circle.radius + ego_radius
        gap = np.sqrt(dist_sq.min(axis=1)) - combined
        clearance = np.minimum(clearance, gap)
        gap_now = math.hypot(x0 - circle.center.x, y0 - circle.center.y) - combined
        required = max(0.0, min(params.inflation + soft, gap_now - RATCHET_SLACK))
        admissible &= gap >= required

    bearing_err = math.atan2(goal.y - y0, goal.x - x0) - th0
    if not admissible.any():
        w_escape = limits.w_max if normalize_angle(bearing_err) >= 0.0 else -limits.w_max
        return DwaDecision(
            action=NavAction(0.0, w_escape),
            escaped=True,
            v_grid=vs,
            w_grid=ws,
            scores=np.full(vs.shape, -np.inf),
            admissible=admissible,
        )

    # heading measures progress toward the goal: the distance closed over the
    # rollout, normalized so driving straight at the goal at full speed scores
    # 1 and standing still scores 1/2. Merely pointing at a blocked goal earns
    # nothing, so it is never an absorbing optimum.
    d_start = math.hypot(goal.x - x0, goal.y - y0)
    d_end = np.hypot(goal.x - xs[:, -1], goal.y - ys[:, -1])
    reach = limits.v_max * times[-1]
    heading_score = np.clip(0.5 + (d_start - d_end) / (2.0 * reach), 0.0, 1.0)
    clearance_score = np.minimum(clearance, params.clearance_cap) / params.clearance_cap
    velocity_score = vs / limits.v_max
    scores = (
        params.w_heading * heading_score
        + params.w_clearance * clearance_score
        + params.w_velocity * velocity_score
    )

    idx = np.flatnonzero(admissible)
    order = np.lexsort((np.abs(ws[idx]), -scores[idx]))
    best = int(idx[order[0]])
    return DwaDecision(
        action=NavAction(float(vs[best]), float(ws[best])),
        escaped=False,
        v_grid=vs,
        w_grid=ws,
        scores=scores,
        admissible=admissible,
    )


def dwa_plan(
    ego_pose,
    ego_velocity: NavAction,
    goal: Vec2,
    bodies: list[tuple[Circle, Vec2]],
    ego_radius: float,
    params: DwaParams,
    limits: KinematicLimits,
    body_margins: list[float] | None = None,
) -> NavAction:
    return dwa_decide(
        ego_pose, ego_velocity, goal, bodies, ego_radius, params, limits, body_margins
    ).action


def context_speed_cap(
    scene: SceneView,
    near: float = 0.5,
    far: float = 1.5,
    floor_fraction: float = 0.6,
) -> float:
    """Speed window shrunk by pedestrian proximity.

    Slowing near pedestrians both keeps the ego predictable and keeps it
    visible: crowd members only yield to the ego when their own speed exceeds
    1.5x the ego's, so a slow ego is avoided by nearly everyone. The cap
    falls linearly from v_max at ``far`` to floor_fraction * v_max at
    ``near``, quantized to the planner grid so cached rollouts stay reusable.
    """
    v_max = scene.limits.v_max
    pos = scene.ego_pose.position
    gap = math.inf
    for body, _ in scene.pedestrians:
        gap = min(gap, (body.center - pos).norm() - body.radius - scene.ego_radius)
    if gap >= far:
        return v_max
    frac = max(0.0, (gap - near) / (far - near))
    cap = v_max * (floor_fraction + (1.0 - floor_fraction) * frac)
    # quantize to tenths of v_max so the cached grid set stays small
    return v_max * max(1, round(10 * cap / v_max)) / 10.0


def orca_ego_plan(
    scene: SceneView,
    orca_params: OrcaParams | None = None,
    k_ang: float = ORCA_EGO_ANGULAR_GAIN,
    ped_margin: float = ORCA_EGO_PED_MARGIN,
    speed_cap: float | None = None,
) -> NavAction:
    """Holonomic ORCA velocity toward the goal, projected to (v, w).

    The linear command is the forward component of the solved velocity (never
    negative: a goal behind the ego yields v = 0 and an in-place turn).
    ped_margin widens pedestrian discs in the ego's own program: the crowd
    does not reliably reciprocate, so the ego plans extra standoff.
    """
    limits = scene.limits
    if orca_params is None:
        # the ego is not guaranteed reciprocity, so it plans with a longer
        # horizon than the crowd's solver
        orca_params = OrcaParams(
            time_horizon_agents=ORCA_EGO_TIME_HORIZON,
            time_horizon_obstacles=ORCA_EGO_OBSTACLE_HORIZON,
            dt=limits.dt,
            safety_margin=ORCA_EGO_SAFETY_MARGIN,
        )
    top_speed = limits.v_max if speed_cap is None else min(limits.v_max, speed_cap)
    to_goal = scene.goal - scene.ego_pose.position
    dist = to_goal.norm()
    if dist > 0.0:
        preferred = to_goal * (min(top_speed, dist / limits.dt) / dist)
    else:
        preferred = Vec2(0.0, 0.0)

    # the cap throttles cruising speed only; the solver keeps the full
    # velocity budget for avoidance maneuvers
    ego = AgentDisc(
        position=scene.ego_pose.position,
        velocity=scene.ego_velocity,
        radius=scene.ego_radius,
        max_speed=limits.v_max,
    )
    neighbors = [
        AgentDisc(body.center, velocity, body.radius + ped_margin, max(velocity.norm(), limits.v_max))
        for body, velocity in scene.pedestrians
    ]
    u = orca_velocity(ego, neighbors, list(scene.obstacles), preferred, orca_params)
    if u.norm() < 1e-12:
        return NavAction(0.0, 0.0)

    heading = scene.ego_pose.heading
    forward = u.x * math.cos(heading) + u.y * math.sin(heading)
    v = min(max(forward, 0.0), top_speed)
    turn = k_ang * normalize_angle(math.atan2(u.y, u.x) - heading)
    w = min(max(turn, -limits.w_max), limits.w_max)
    return NavAction(v, w)


# -- policy objects ----------------------------------------------------------


class ZeroPolicy:
    """Never moves; every episode times out."""

    def __call__(self, observation: Observation, scene: SceneView) -> NavAction:
        return NavAction(0.0, 0.0)


class StraightPolicy:
    """Full speed toward the goal with proportional heading correction."""

    def __init__(self, k_ang: float = 2.0):
        self.k_ang = k_ang

    def __call__(self, observation: Observation, scene: SceneView) -> NavAction:
        limits = scene.limits
        _, bearing = observation.goal_polar
        w = min(max(self.k_ang * bearing, -limits.w_max), limits.w_max)
        v = limits.v_max if abs(bearing) < math.pi / 2 else 0.0
        return NavAction(v, w)


class DwaPolicy:
    """Dynamic-window planner over the privileged scene; counts escape steps.

    ped_margin is the per-pedestrian soft admissibility margin: pedestrians
    can turn or lunge off their extrapolated track within one replanning
    period, which a constant-velocity rollout cannot see.
    """

    def __init__(
        self,
        params: DwaParams | None = None,
        ped_margin: float = 0.3,
        slow_near_peds: bool = True,
    ):
        self.params = params or DwaParams()
        self.ped_margin = ped_margin
        self.slow_near_peds = slow_near_peds
        self.escape_steps = 0

    def __call__(self, observation: Observation, scene: SceneView) -> NavAction:
        bodies = list(scene.pedestrians)
        bodies += [(c, Vec2(0.0, 0.0)) for c in scene.obstacles]
        margins = [self.ped_margin] * len(scene.pedestrians) + [0.0] * len(scene.obstacles)
        limits = scene.limits
        if self.slow_near_peds:
            cap = context_speed_cap(scene)
            if cap < limits.v_max:
                limits = replace(limits, v_max=cap)
        decision = dwa_decide(
            scene.ego_pose,
            observation.prev_action,
            scene.goal,
            bodies,
            scene.ego_radius,
            self.params,
            limits,
            margins,
        )
        if decision.escaped:
            self.escape_steps += 1
        return decision.action


class OrcaPolicy:
    """Reciprocal-avoidance planner with the ego as a cooperating agent."""

    def __init__(
        self,
        orca_params: OrcaParams | None = None,
        k_ang: float = ORCA_EGO_ANGULAR_GAIN,
        ped_margin: float = ORCA_EGO_PED_MARGIN,
        slow_near_peds: bool = True,
    ):
        self.orca_params = orca_params
        self.k_ang = k_ang
        self.ped_margin = ped_margin
        self.slow_near_peds = slow_near_peds

    def __call__(self, observation: Observation, scene: SceneView) -> NavAction:
        cap = context_speed_cap(scene) if self.slow_near_peds else None
        return orca_ego_plan(scene, self.orca_params, self.k_ang, self.ped_margin, cap)


POLICY_NAMES = ("zero", "straight", "dwa", "orca")


def make_policy(name: str, params: dict | None = None):
    """Instantiate a named policy; ``params`` feeds its constructor."""
    params = dict(params or {})
    if name == "zero":
        return ZeroPolicy()
    if name == "straight":
        return StraightPolicy(**params)
    if name == "dwa":
        ped_margin = params.pop("ped_margin", 0.3)
        slow = params.pop("slow_near_peds", True)
        return DwaPolicy(DwaParams(**params) if params else None, ped_margin, slow)
    if name == "orca":
        k_ang = params.pop("k_ang", ORCA_EGO_ANGULAR_GAIN)
        ped_margin = params.pop("ped_margin", ORCA_EGO_PED_MARGIN)
        slow = params.pop("slow_near_peds", True)
        return OrcaPolicy(OrcaParams(**params) if params else None, k_ang, ped_margin, slow)
    raise ValueError(f"unknown policy '{name}' (choose from {', '.join(POLICY_NAMES)})")
