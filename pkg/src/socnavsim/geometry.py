"""2D geometric primitives: vectors, poses, circles, frame transforms, ray casting.

All angles are radians, all lengths meters, all times seconds. Headings are
kept normalized to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - theta) % TWO_PI


@dataclass(frozen=True)
class Vec2:
    """2D vector in meters. Components must be finite."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Vec2 components ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def det(self, other: "Vec2") -> float:
        """z-component of the cross product self x other."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def perp_left(self) -> "Vec2":
        """Counter-clockwise perpendicular (the 'left' of this direction)."""
        return Vec2(-self.y, self.x)

    def normalized(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            return Vec2(0.0, 0.0)
        return Vec2(self.x / n, self.y / n)


ZERO_VEC = Vec2(0.0, 0.0)


@dataclass(frozen=True)
class Pose2:
    """Position plus heading in the world frame. Heading normalized to (-pi, pi]."""

    position: Vec2
    heading: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.heading):
            raise ValueError(f"non-finite heading {self.heading}")
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True)
class Circle:
    """Disc-shaped body in the world frame. Radius strictly positive."""

    center: Vec2
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError(f"circle radius must be > 0, got {self.radius}")


def rotate(v: Vec2, theta: float) -> Vec2:
    """Rotate a vector counter-clockwise by theta."""
    c, s = math.cos(theta), math.sin(theta)
    return Vec2(c * v.x - s * v.y, s * v.x + c * v.y)


def frame_to_world(p_local: Vec2, frame: Pose2) -> Vec2:
    """Map a point from a pose's local frame into the world frame."""
    return frame.position + rotate(p_local, frame.heading)


def world_to_frame(p_world: Vec2, frame: Pose2) -> Vec2:
    """Map a world point into a pose's local frame (inverse of frame_to_world)."""
    return rotate(p_world - frame.position, -frame.heading)


def ray_circle_hit(origin: Vec2, direction: Vec2, circle: Circle, max_range: float) -> float | None:
    """Distance along a ray to the first circle intersection, if any.

    Returns the smallest t in (0, max_range] with |origin + t*direction - center|
    = radius, or None when the ray misses within max_range. An origin strictly
    inside the circle returns 0.0: the beam is immediately blocked.

    ``direction`` is expected to be unit length; the quadratic below uses the
    actual squared norm so mildly denormalized inputs stay consistent.
    """
    rel = origin - circle.center
    c = rel.norm_sq() - circle.radius * circle.radius
    if c < 0.0:
        return 0.0
    a = direction.norm_sq()
    b = 2.0 * rel.dot(direction)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    t = (-b - sq) / (2.0 * a)
    if t <= 0.0:
        t = (-b + sq) / (2.0 * a)
    if t <= 0.0 or t > max_range:
        return None
    return t
