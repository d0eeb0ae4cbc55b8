"""Pedestrian crowd driven by reciprocal collision avoidance.

Pedestrians walk toward individual goals at individual preferred speeds,
avoiding each other and static obstacles. The controlled ego-agent is only a
conditional neighbor: a pedestrian takes it into account when the pedestrian's
own current speed is at least 1.5 times the ego's speed, and ignores it
otherwise, which forces the ego to dodge slow pedestrians itself. Solved
velocities are optionally perturbed with per-component uniform noise before
integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Circle, Pose2, Vec2
from .orca import AgentDisc, OrcaParams, orca_velocity

PEDESTRIAN_RADIUS = 0.3
PEDESTRIAN_SPEED_RANGE = (0.8, 1.2)
EGO_SPEED_FACTOR = 1.5


@dataclass(frozen=True)
class PedestrianState:
    """One pedestrian disc: where it is, how it moves, where it wants to go."""

    position: Vec2
    velocity: Vec2
    radius: float
    preferred_speed: float
    goal: Vec2

    def __post_init__(self) -> None:
        if self.radius <= 0.0 or self.preferred_speed <= 0.0:
            raise ValueError("pedestrian radius and preferred_speed must be positive")

    def body(self) -> Circle:
        return Circle(self.position, self.radius)

    def as_disc(self) -> AgentDisc:
        return AgentDisc(self.position, self.velocity, self.radius, self.preferred_speed)


@dataclass
class CrowdState:
    """All pedestrians plus the seeded random stream that perturbs them."""

    pedestrians: list[PedestrianState]
    rng: np.random.Generator


@dataclass(frozen=True)
class EgoBody:
    """Ego-agent as the crowd sees it: pose, realized velocity, body radius.

    velocity is the displacement of the ego's last move over dt, so pedestrian
    avoidance cones extrapolate what the ego actually did rather than its
    commanded heading.
    """

    pose: Pose2
    velocity: Vec2
    radius: float

    @property
    def speed(self) -> float:
        return self.velocity.norm()

    def as_disc(self) -> AgentDisc:
        return AgentDisc(self.pose.position, self.velocity, self.radius, max(self.speed, 0.5))


def _preferred_velocity(ped: PedestrianState, dt: float) -> Vec2:
    to_goal = ped.goal - ped.position
    dist = to_goal.norm()
    if dist > ped.preferred_speed * dt:
        return to_goal * (ped.preferred_speed / dist)
    if dist > 0.0:
        return to_goal * (1.0 / dt)
    return Vec2(0.0, 0.0)


def step_crowd(
    crowd: CrowdState,
    ego: EgoBody | None,
    obstacles: list[Circle],
    dt: float,
    noise: float = 0.0,
    params: OrcaParams | None = None,
) -> CrowdState:
    """Advance every pedestrian by one synchronous step.

    All new velocities are computed from the previous-step snapshot, then
    committed together. ``noise`` is the half-width of the per-component
    uniform velocity perturbation (0 disables it and consumes no random
    draws); after perturbation the speed is clamped to
    preferred_speed + noise * sqrt(2).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    params = params or OrcaParams(dt=dt)

    discs = [ped.as_disc() for ped in crowd.pedestrians]
    ego_disc = ego.as_disc() if ego is not None else None
    speed_gate = EGO_SPEED_FACTOR * ego.speed if ego is not None else math.inf

    new_peds: list[PedestrianState] = []
    for idx, ped in enumerate(crowd.pedestrians):
        neighbors = [d for j, d in enumerate(discs) if j != idx]
        if ego_disc is not None and ped.velocity.norm() >= speed_gate:
            neighbors.append(ego_disc)
        velocity = orca_velocity(
            discs[idx], neighbors, obstacles, _preferred_velocity(ped, dt), params
        )
        if noise > 0.0:
            jitter = crowd.rng.uniform(-noise, noise, 2)
            velocity = Vec2(velocity.x + jitter[0], velocity.y + jitter[1])
            cap = ped.preferred_speed + noise * math.sqrt(2.0)
            speed = velocity.norm()
            if speed > cap:
                velocity = velocity * (cap / speed)
        new_peds.append(
            replace(ped, position=ped.position + velocity * dt, velocity=velocity)
        )
    return CrowdState(pedestrians=new_peds, rng=crowd.rng)


def pairwise_penetrations(pedestrians: list[PedestrianState]) -> int:
    """Number of pedestrian pairs whose discs currently overlap."""
    count = 0
    for i in range(len(pedestrians)):
        for j in range(i + 1, len(pedestrians)):
            gap = (pedestrians[i].position - pedestrians[j].position).norm()
            if gap < pedestrians[i].radius + pedestrians[j].radius:
                count += 1
    return count
