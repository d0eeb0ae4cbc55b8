"""Optimal reciprocal collision avoidance in velocity space.

Each neighbor induces a half-plane of admissible velocities; the agent picks
the feasible velocity closest to its preferred one by solving a small linear
program over the half-planes intersected with the max-speed disc. When the 2D
program is infeasible the velocity of least constraint violation is chosen by
the standard projection onto the constraint boundaries (obstacle constraints
stay hard).

Moving agents split avoidance responsibility evenly; static obstacle discs do
not reciprocate, so the agent takes the full correction against them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .geometry import Circle, Vec2

logger = logging.getLogger(__name__)

_EPS = 1e-5
HEADON_EPSILON = 1e-6

# a half-plane constraint: velocities v with det(direction, point - v) <= 0
# are admissible; stored flat as (point_x, point_y, dir_x, dir_y)
Line = tuple[float, float, float, float]


@dataclass(frozen=True)
class AgentDisc:
    """Snapshot of one disc-shaped agent as seen by the ORCA solver."""

    position: Vec2
    velocity: Vec2
    radius: float
    max_speed: float


@dataclass(frozen=True)
class OrcaParams:
    """Solver tuning: horizons, neighborhood, integration period, margin.

    safety_margin inflates body radii inside the constraint construction only
    (never in physical overlap tests): the continuous-time avoidance guarantee
    erodes under discrete integration, and exact tangency solutions otherwise
    graze into real contact.
    """

    time_horizon_agents: float = 2.0
    time_horizon_obstacles: float = 1.0
    neighbor_distance: float = 10.0
    max_neighbors: int = 10
    dt: float = 0.2
    safety_margin: float = 0.25
    responsibility: float = 0.5

    def __post_init__(self) -> None:
        if min(
            self.time_horizon_agents,
            self.time_horizon_obstacles,
            self.neighbor_distance,
            self.max_neighbors,
            self.dt,
        ) <= 0:
            raise ValueError("all ORCA parameters must be positive")
        if self.safety_margin < 0.0:
            raise ValueError("safety_margin must be non-negative")
        if not 0.0 < self.responsibility <= 1.0:
            raise ValueError("responsibility must be in (0, 1]")


def line_violation(line: Line, vx: float, vy: float) -> float:
    """Signed violation of a half-plane by a velocity; <= 0 means admissible."""
    px, py, dx, dy = line
    return dx * (py - vy) - dy * (px - vx)


def _vo_line(
    px: float,
    py: float,
    vx: float,
    vy: float,
    rel_px: float,
    rel_py: float,
    rel_vx: float,
    rel_vy: float,
    combined: float,
    inv_tau: float,
    inv_dt: float,
    share: float,
) -> Line:
    """Half-plane cut out of velocity space by one neighbor disc.

    (rel_p, rel_v) are neighbor-position minus self-position and self-velocity
    minus neighbor-velocity. ``combined`` includes the safety margin, so the
    inflated discs may overlap even when the bodies do not; that case resolves
    the conflict within one time step instead of the horizon.
    """
    dist_sq = rel_px * rel_px + rel_py * rel_py
    combined_sq = combined * combined

    if dist_sq <= combined_sq:
        # inflated overlap: escape within one step. The margin is a unilateral
        # buffer, not a negotiated contract, so the ejection takes full
        # responsibility instead of the reciprocal share; otherwise sustained
        # goal pressure from the other side grinds through the buffer.
        wx = rel_vx - inv_dt * rel_px
        wy = rel_vy - inv_dt * rel_py
        w_len_sq = wx * wx + wy * wy
        if w_len_sq == 0.0:
            inv_d = 1.0 / math.sqrt(dist_sq) if dist_sq > 0.0 else 0.0
            uwx, uwy = -rel_px * inv_d, -rel_py * inv_d
            w_len = 0.0
        else:
            w_len = math.sqrt(w_len_sq)
            uwx, uwy = wx / w_len, wy / w_len
        dir_x, dir_y = uwy, -uwx
        scale = combined * inv_dt - w_len
        return (vx + scale * uwx, vy + scale * uwy, dir_x, dir_y)

    # vector from the truncation-disc center to the relative velocity
    wx = rel_vx - inv_tau * rel_px
    wy = rel_vy - inv_tau * rel_py
    w_len_sq = wx * wx + wy * wy
    dot1 = wx * rel_px + wy * rel_py

    if dot1 < 0.0 and dot1 * dot1 > combined_sq * w_len_sq:
        # closest escape is through the truncation disc
        if w_len_sq == 0.0:
            # relative velocity exactly at the disc center: push straight back
            inv_d = 1.0 / math.sqrt(dist_sq)
            uwx, uwy = -rel_px * inv_d, -rel_py * inv_d
            w_len = 0.0
        else:
            w_len = math.sqrt(w_len_sq)
            uwx, uwy = wx / w_len, wy / w_len
        dir_x, dir_y = uwy, -uwx
        scale = combined * inv_tau - w_len
        ux, uy = scale * uwx, scale * uwy
    else:
        # closest escape is across one of the legs
        leg = math.sqrt(dist_sq - combined_sq)
        if rel_px * wy - rel_py * wx > 0.0:
            dir_x = (rel_px * leg - rel_py * combined) / dist_sq
            dir_y = (rel_px * combined + rel_py * leg) / dist_sq
        else:
            dir_x = -(rel_px * leg + rel_py * combined) / dist_sq
            dir_y = -(-rel_px * combined + rel_py * leg) / dist_sq
        dot2 = rel_vx * dir_x + rel_vy * dir_y
        ux, uy = dot2 * dir_x - rel_vx, dot2 * dir_y - rel_vy

    return (vx + share * ux, vy + share * uy, dir_x, dir_y)


def _lp1(
    lines: list[Line],
    line_no: int,
    radius: float,
    opt_x: float,
    opt_y: float,
    direction_opt: bool,
) -> tuple[float, float] | None:
    """Optimize along one constraint boundary; None when infeasible."""
    px, py, dx, dy = lines[line_no]
    dot = px * dx + py * dy
    disc = dot * dot + radius * radius - (px * px + py * py)
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    t_left = -dot - sq
    t_right = -dot + sq

    for i in range(line_no):
        qx, qy, ex, ey = lines[i]
        denom = dx * ey - dy * ex
        numer = ex * (py - qy) - ey * (px - qx)
        if abs(denom) <= _EPS:
            if numer < 0.0:
                return None
            continue
        t = numer / denom
        if denom >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return None

    if direction_opt:
        t = t_right if opt_x * dx + opt_y * dy > 0.0 else t_left
    else:
        t = dx * (opt_x - px) + dy * (opt_y - py)
        if t < t_left:
            t = t_left
        elif t > t_right:
            t = t_right
    return (px + t * dx, py + t * dy)


def _lp2(
    lines: list[Line],
    radius: float,
    opt_x: float,
    opt_y: float,
    direction_opt: bool,
) -> tuple[int, float, float]:
    """Feasible velocity closest to the optimization target.

    Returns (len(lines), vx, vy) on success, or (i, vx, vy) with the result
    so far when constraint i cannot be satisfied.
    """
    if direction_opt:
        rx, ry = opt_x * radius, opt_y * radius
    elif opt_x * opt_x + opt_y * opt_y > radius * radius:
        inv = radius / math.sqrt(opt_x * opt_x + opt_y * opt_y)
        rx, ry = opt_x * inv, opt_y * inv
    else:
        rx, ry = opt_x, opt_y

    for i, (px, py, dx, dy) in enumerate(lines):
        if dx * (py - ry) - dy * (px - rx) > 0.0:
            res = _lp1(lines, i, radius, opt_x, opt_y, direction_opt)
            if res is None:
                return i, rx, ry
            rx, ry = res
    return len(lines), rx, ry


def _lp3(
    lines: list[Line],
    n_hard: int,
    begin: int,
    radius: float,
    rx: float,
    ry: float,
) -> tuple[float, float]:
    """Least-violation fallback when the 2D program is infeasible.

    Walks the violated soft constraints and minimizes the maximum violation;
    the first n_hard lines (obstacles) are never relaxed.
    """
    distance = 0.0
    for i in range(begin, len(lines)):
        px, py, dx, dy = lines[i]
        if dx * (py - ry) - dy * (px - rx) > distance:
            proj: list[Line] = list(lines[:n_hard])
            for j in range(n_hard, i):
                qx, qy, ex, ey = lines[j]
                determinant = dx * ey - dy * ex
                if abs(determinant) <= _EPS:
                    if dx * ex + dy * ey > 0.0:
                        continue
                    ppx, ppy = 0.5 * (px + qx), 0.5 * (py + qy)
                else:
                    tt = (ex * (py - qy) - ey * (px - qx)) / determinant
                    ppx, ppy = px + tt * dx, py + tt * dy
                ndx, ndy = ex - dx, ey - dy
                n = math.sqrt(ndx * ndx + ndy * ndy)
                proj.append((ppx, ppy, ndx / n, ndy / n))
            fail, nrx, nry = _lp2(proj, radius, -dy, dx, True)
            if fail == len(proj):
                rx, ry = nrx, nry
            distance = dx * (py - ry) - dy * (px - rx)
    return rx, ry


def _headon_degenerate(
    rel_px: float,
    rel_py: float,
    rel_vx: float,
    rel_vy: float,
    pref_x: float,
    pref_y: float,
) -> bool:
    """Exactly collinear, approaching configuration that would stall the LP."""
    if rel_px * rel_vy - rel_py * rel_vx != 0.0:
        return False
    if rel_px * pref_y - rel_py * pref_x != 0.0:
        return False
    return rel_vx * rel_px + rel_vy * rel_py > 0.0 or pref_x * rel_px + pref_y * rel_py > 0.0


def _prune_neighbors(agent: AgentDisc, neighbors: list[AgentDisc], params: OrcaParams) -> list[AgentDisc]:
    limit_sq = params.neighbor_distance * params.neighbor_distance
    in_range = []
    for nb in neighbors:
        dx = nb.position.x - agent.position.x
        dy = nb.position.y - agent.position.y
        d_sq = dx * dx + dy * dy
        if d_sq <= limit_sq:
            in_range.append((d_sq, nb))
    in_range.sort(key=lambda item: item[0])
    return [nb for _, nb in in_range[: params.max_neighbors]]


def _body_iter(neighbors: list[AgentDisc], obstacles: list[Circle]):
    for nb in neighbors:
        yield nb.position, nb.radius
    for obs in obstacles:
        yield obs.center, obs.radius


def orca_halfplanes(
    agent: AgentDisc,
    neighbors: list[AgentDisc],
    obstacles: list[Circle],
    preferred_velocity: Vec2,
    params: OrcaParams,
) -> tuple[list[Line], int, Vec2]:
    """Constraint set for one solve: (lines, number of hard obstacle lines,
    possibly tie-broken preferred velocity).

    Obstacle constraints come first and are never relaxed by the infeasible
    fallback. An exact head-on degeneracy with any neighbor perturbs the
    preferred velocity by HEADON_EPSILON m/s to the agent's left, which is the
    deterministic symmetry break for the otherwise stalling configuration.
    """
    px, py = agent.position.x, agent.position.y
    vx, vy = agent.velocity.x, agent.velocity.y
    pref_x, pref_y = preferred_velocity.x, preferred_velocity.y
    close = _prune_neighbors(agent, neighbors, params)

    for nb in close:
        rel_px, rel_py = nb.position.x - px, nb.position.y - py
        rel_vx, rel_vy = vx - nb.velocity.x, vy - nb.velocity.y
        if _headon_degenerate(rel_px, rel_py, rel_vx, rel_vy, pref_x, pref_y):
            if pref_x * pref_x + pref_y * pref_y > 0.0:
                bx, by = pref_x, pref_y
            elif rel_vx * rel_vx + rel_vy * rel_vy > 0.0:
                bx, by = rel_vx, rel_vy
            else:
                bx, by = rel_px, rel_py
            inv = HEADON_EPSILON / math.hypot(bx, by)
            pref_x -= by * inv
            pref_y += bx * inv
            break

    lines: list[Line] = []
    inv_tau_obs = 1.0 / params.time_horizon_obstacles
    inv_dt = 1.0 / params.dt
    margin = params.safety_margin
    for obs in obstacles:
        rel_px, rel_py = obs.center.x - px, obs.center.y - py
        combined = agent.radius + obs.radius + margin
        lines.append(
            _vo_line(px, py, vx, vy, rel_px, rel_py, vx, vy, combined, inv_tau_obs, inv_dt, 1.0)
        )
    n_hard = len(lines)

    inv_tau = 1.0 / params.time_horizon_agents
    share = params.responsibility
    for nb in close:
        rel_px, rel_py = nb.position.x - px, nb.position.y - py
        rel_vx, rel_vy = vx - nb.velocity.x, vy - nb.velocity.y
        combined = agent.radius + nb.radius + margin
        lines.append(
            _vo_line(
                px, py, vx, vy, rel_px, rel_py, rel_vx, rel_vy, combined, inv_tau, inv_dt, share
            )
        )
    return lines, n_hard, Vec2(pref_x, pref_y)


def orca_velocity(
    agent: AgentDisc,
    neighbors: list[AgentDisc],
    obstacles: list[Circle],
    preferred_velocity: Vec2,
    params: OrcaParams,
) -> Vec2:
    """New velocity: closest to preferred among all half-planes, |v| <= max_speed.

    A body already overlapping the agent is a degenerate input; instead of
    panicking the solver returns a direct separation velocity away from the
    most-penetrating body at max speed, and logs the event.
    """
    px, py = agent.position.x, agent.position.y

    worst_gap = 0.0
    away: tuple[float, float] | None = None
    for body_pos, body_r in _body_iter(neighbors, obstacles):
        rel_x, rel_y = px - body_pos.x, py - body_pos.y
        d = math.sqrt(rel_x * rel_x + rel_y * rel_y)
        gap = d - (agent.radius + body_r)
        if gap <= 0.0 and gap <= worst_gap:
            worst_gap = gap
            away = (rel_x / d, rel_y / d) if d > 0.0 else (1.0, 0.0)
    if away is not None:
        logger.debug("orca overlap fallback: penetration %.4f m, pushing apart", -worst_gap)
        return Vec2(away[0] * agent.max_speed, away[1] * agent.max_speed)

    lines, n_hard, pref = orca_halfplanes(agent, neighbors, obstacles, preferred_velocity, params)
    fail, rx, ry = _lp2(lines, agent.max_speed, pref.x, pref.y, False)
    if fail < len(lines):
        rx, ry = _lp3(lines, n_hard, fail, agent.max_speed, rx, ry)
    return Vec2(rx, ry)
