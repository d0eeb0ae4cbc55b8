"""Simulated 360-degree LiDAR and historical-scan re-projection.

A scan is N evenly spaced beams cast against circular bodies. Historical scans
are re-projected into the current ego frame by mapping each beam's hit point
local -> world -> current frame and taking its distance, which cancels the
ego's own motion: static structure lines up across time steps and only
independently moving bodies shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import Circle, Pose2

N_BEAMS = 1800
STACK_DEPTH = 6
DEFAULT_MAX_RANGE = 10.0
MIN_RANGE = 1e-3


@lru_cache(maxsize=8)
def beam_unit_vectors(n_beams: int) -> np.ndarray:
    """Unit direction of each beam in the ego frame, beam i at angle 2*pi*i/n."""
    angles = 2.0 * np.pi * np.arange(n_beams) / n_beams
    out = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LidarScan:
    """One range sweep plus the pose it was captured from.

    ranges[i] is the distance along beam i (ego-frame angle 2*pi*i/N, world
    angle capture heading + that); a beam with no hit reads exactly max_range.
    """

    ranges: np.ndarray
    capture_pose: Pose2
    max_range: float = DEFAULT_MAX_RANGE

    def __post_init__(self) -> None:
        if self.ranges.ndim != 1:
            raise ValueError("ranges must be a 1-D array")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")

    @property
    def n_beams(self) -> int:
        return self.ranges.shape[0]

    def points_world(self) -> np.ndarray:
        """World-frame hit point of every beam, shape (N, 2).

        Depends only on the frozen scan, so the result is memoized: the same
        array serves every later re-projection of this scan.
        """
        cached = self.__dict__.get("_points_world")
        if cached is None:
            local = scan_points_local(self)
            c, s = np.cos(self.capture_pose.heading), np.sin(self.capture_pose.heading)
            pos = self.capture_pose.position
            cached = np.empty_like(local)
            cached[:, 0] = pos.x + c * local[:, 0] - s * local[:, 1]
            cached[:, 1] = pos.y + s * local[:, 0] + c * local[:, 1]
            cached.setflags(write=False)
            self.__dict__["_points_world"] = cached
        return cached


def cast_scan(
    ego: Pose2,
    circles: list[Circle],
    max_range: float = DEFAULT_MAX_RANGE,
    n_beams: int = N_BEAMS,
) -> LidarScan:
    """Cast all beams from the ego pose against circular bodies.

    Beam i points at world angle ego.heading + 2*pi*i/n_beams; its range is
    the nearest circle intersection, or max_range when nothing is hit. The
    ego's own body is never among ``circles``. An ego strictly inside a circle
    reads 0 on every beam (immediately blocked).

    Only beams inside the angular cone subtended by each circle (plus a
    two-beam guard band) are solved; all others provably miss.
    """
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    base = beam_unit_vectors(n_beams)
    ch, sh = math.cos(ego.heading), math.sin(ego.heading)
    beam_step = 2.0 * math.pi / n_beams

    best = np.full(n_beams, max_range)
    ox, oy = ego.position.x, ego.position.y
    for circle in circles:
        lx, ly = ox - circle.center.x, oy - circle.center.y
        dist_sq = lx * lx + ly * ly
        c = dist_sq - circle.radius * circle.radius
        if c < 0.0:
            best[:] = 0.0
            break
        if c > max_range * (max_range + 2.0 * circle.radius):
            continue  # nearest possible hit (d - r) is beyond max_range
        # beams that can hit lie within asin(r/d) of the center bearing
        bearing = math.atan2(-ly, -lx)
        half = math.asin(min(1.0, circle.radius / math.sqrt(dist_sq)))
        center_idx = (bearing - ego.heading) / beam_step
        width = int(half / beam_step) + 2
        first = math.floor(center_idx) - width
        count = min(2 * width + 2, n_beams)
        start = first % n_beams
        # the candidate window as one or two contiguous ring segments
        if start + count <= n_beams:
            segments = ((start, start + count),)
        else:
            segments = ((start, n_beams), (0, start + count - n_beams))
        for s, e in segments:
            bx = base[s:e, 0]
            by = base[s:e, 1]
            dx = ch * bx - sh * by
            dy = sh * bx + ch * by
            b = 2.0 * (lx * dx + ly * dy)
            disc = b * b - 4.0 * c
            valid = disc >= 0.0
            sq = np.sqrt(np.where(valid, disc, 0.0))
            t = 0.5 * (-b - sq)
            t_far = 0.5 * (-b + sq)
            t = np.where(t > 0.0, t, np.where(t_far > 0.0, t_far, np.inf))
            t[~valid] = np.inf
            t[t > max_range] = np.inf
            np.minimum(best[s:e], t, out=best[s:e])
    return LidarScan(ranges=best, capture_pose=ego, max_range=max_range)


def scan_points_local(scan: LidarScan) -> np.ndarray:
    """Hit points in the capture frame, shape (N, 2): point i at angle 2*pi*i/N."""
    base = beam_unit_vectors(scan.n_beams)
    return scan.ranges[:, None] * base


def reproject_scan(old: LidarScan, current_pose: Pose2) -> np.ndarray:
    """Ranges of an old scan's hit points as seen from a new pose.

    Output index i keeps old beam i's world point: the transformed scan is the
    ordered set of per-point distances, not a re-binning by bearing. Distances
    are clamped into [MIN_RANGE, max_range]. A pure rotation of the ego leaves
    every value unchanged; current_pose == capture pose is the identity.
    """
    pts = old.points_world()
    dx = pts[:, 0] - current_pose.position.x
    dy = pts[:, 1] - current_pose.position.y
    r = np.sqrt(dx * dx + dy * dy)
    return np.clip(r, MIN_RANGE, old.max_range)


@dataclass
class ScanStack:
    """Rolling buffer of the K most recent scans, oldest first.

    Until K scans have been pushed, the oldest available scan is replicated to
    pad the front, so the stack is always full after the first push.
    """

    depth: int = STACK_DEPTH
    scans: list[LidarScan] = field(default_factory=list)

    def push(self, scan: LidarScan) -> None:
        if not self.scans:
            self.scans = [scan] * self.depth
        else:
            self.scans = self.scans[1:] + [scan]

    @property
    def newest(self) -> LidarScan:
        if not self.scans:
            raise ValueError("empty scan stack")
        return self.scans[-1]


@dataclass(frozen=True)
class TransformedStack:
    """K x N observation matrix in the current ego frame.

    Rows 0..K-2 are historical scans re-projected into the current frame; the
    last row is the newest scan unchanged.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("transformed stack must be a K x N matrix")


def build_observation(stack: ScanStack, current_pose: Pose2) -> TransformedStack:
    """Assemble the K x N scan observation for the current pose."""
    if not stack.scans:
        raise ValueError("cannot build an observation from an empty scan stack")
    history = stack.scans[:-1]
    newest = stack.newest
    pts = np.stack([scan.points_world() for scan in history])  # (K-1, N, 2)
    dx = pts[:, :, 0] - current_pose.position.x
    dy = pts[:, :, 1] - current_pose.position.y
    rows = np.sqrt(dx * dx + dy * dy)
    np.clip(rows, MIN_RANGE, newest.max_range, out=rows)
    return TransformedStack(values=np.concatenate([rows, newest.ranges[None, :]]))
