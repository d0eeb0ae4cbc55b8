"""Acceptance gate: every shipped-quality criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with -s to see them inline). The
500-trial DWA benchmark is executed once and shared between the quality-bound
and throughput criteria.
"""

import math
import os
import time

import numpy as np
import pytest

from socnavsim.bench import run_benchmark
from socnavsim.crowd import CrowdState, PedestrianState, pairwise_penetrations, step_crowd
from socnavsim.geometry import Circle, Pose2, Vec2, frame_to_world, world_to_frame
from socnavsim.kinematics import NavAction, clip_action, step_differential
from socnavsim.lidar import MIN_RANGE, N_BEAMS, LidarScan, ScanStack, build_observation, cast_scan, reproject_scan
from socnavsim.orca import AgentDisc, OrcaParams, orca_velocity
from socnavsim.reward import RewardInputs, RewardParams, Terminal, angular_penalty, nav_reward
from socnavsim.scenario import ScenarioConfig

BENCH_WORKERS = min(4, os.cpu_count() or 1)


def report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {status}: {name}" + (f"  [{detail}]" if detail else ""))
    assert passed, f"{name}: {detail}"


@pytest.fixture(scope="module")
def dwa_benchmark_500():
    config = ScenarioConfig()
    start = time.perf_counter()
    result = run_benchmark(config, "dwa", 500, 0, workers=BENCH_WORKERS)
    elapsed = time.perf_counter() - start
    return result, elapsed


def test_scan_transform_identity():
    """Stationary ego in a static scene: all stacked rows pairwise equal."""
    circles = [
        Circle(Vec2(3.0, 1.0), 0.6),
        Circle(Vec2(-2.0, -2.5), 0.8),
        Circle(Vec2(0.5, -3.0), 0.3),
    ]
    pose = Pose2(Vec2(0.2, -0.1), 0.7)
    start = time.perf_counter()
    stack = ScanStack(depth=6)
    for _ in range(6):
        stack.push(cast_scan(pose, circles, 10.0))
    obs = build_observation(stack, pose)
    worst = 0.0
    for i in range(6):
        for j in range(i + 1, 6):
            worst = max(worst, float(np.max(np.abs(obs.values[i] - obs.values[j]))))
    elapsed = time.perf_counter() - start
    report(
        "scan-transform identity (6 rows pairwise equal within 1e-9, < 1 s)",
        worst <= 1e-9 and elapsed < 1.0,
        f"max row diff {worst:.2e}, {elapsed:.3f} s",
    )


def test_ego_motion_cancellation():
    """10^4 random (old pose, new pose, beam): the re-projected point is the
    same world point, and the transformed range is its distance."""
    rng = np.random.default_rng(2024)
    worst_point = 0.0
    worst_range = 0.0
    for _ in range(10_000):
        old_pose = Pose2(Vec2(*rng.uniform(-5, 5, 2)), float(rng.uniform(-4, 4)))
        new_pose = Pose2(Vec2(*rng.uniform(-5, 5, 2)), float(rng.uniform(-4, 4)))
        i = int(rng.integers(0, N_BEAMS))
        r = float(rng.uniform(0.2, 9.5))
        angle = 2.0 * math.pi * i / N_BEAMS
        local = Vec2(r * math.cos(angle), r * math.sin(angle))
        world = frame_to_world(local, old_pose)
        relocated = world_to_frame(world, new_pose)
        recovered = frame_to_world(relocated, new_pose)
        worst_point = max(
            worst_point, math.hypot(recovered.x - world.x, recovered.y - world.y)
        )
        ranges = np.full(N_BEAMS, 10.0)
        ranges[i] = r
        out = reproject_scan(LidarScan(ranges, old_pose, 10.0), new_pose)
        expected = min(10.0, max(MIN_RANGE, relocated.norm()))
        worst_range = max(worst_range, abs(float(out[i]) - expected))
    report(
        "ego-motion cancellation (10^4 round trips within 1e-9)",
        worst_point <= 1e-9 and worst_range <= 1e-9,
        f"worst point {worst_point:.2e}, worst range {worst_range:.2e}",
    )


def test_reward_conformance():
    """Four-branch reward with the published constants, terminals, penalty."""
    params = RewardParams()
    constants_ok = (
        params.r_robot == 0.3
        and params.r_dis == 0.5
        and params.w_dis == 0.4
        and params.w_goal == 1.4
        and params.terminal_bonus == 0.5
        and params.collision_penalty == -0.5
        and params.w_ang == 0.01
    )

    def run(prev, goal, d_min):
        return nav_reward(RewardInputs(prev, goal, d_min), params)

    table = [
        (run(1.0, 0.25, 0.0), (0.5, Terminal.ARRIVAL)),
        (run(2.1, 2.0, 0.28), (-0.5, Terminal.COLLISION)),
        (run(2.1, 2.0, 0.8), (0.14, Terminal.NONE)),
        (run(2.0, 2.1, 5.0), (-0.14, Terminal.NONE)),
        (run(2.0, 2.0, 0.55), (0.4 * (0.55 - 0.8), Terminal.NONE)),
    ]
    table_ok = all(
        got[1] is want[1] and got[0] == pytest.approx(want[0], abs=1e-12)
        for got, want in table
    )

    precedence_ok = (
        run(9.0, 0.3, 0.0)[1] is Terminal.ARRIVAL
        and run(9.0, 0.31, 0.3)[1] is Terminal.COLLISION
        and run(9.0, 0.31, 0.31)[1] is Terminal.NONE
    )
    eps = 1e-9
    continuity_ok = run(3.0, 2.9, 0.8 - eps)[0] == pytest.approx(
        run(3.0, 2.9, 0.8 + eps)[0], abs=1e-8
    )
    penalty_ok = (
        angular_penalty(-1.0, 1.0, params.w_ang) == pytest.approx(-0.02)
        and angular_penalty(0.5, 0.5, params.w_ang) == 0.0
    )
    report(
        "reward conformance (branch table, precedence, continuity, -0.01|dw|)",
        constants_ok and table_ok and precedence_ok and continuity_ok and penalty_ok,
    )


def test_clip_rule():
    """Exact clip truth table including the v == 0.3 boundary."""
    cases_ok = (
        clip_action(NavAction(0.29, 0.8), 0.3) == NavAction(0.0, 0.0)
        and clip_action(NavAction(0.30, 0.8), 0.3) == NavAction(0.30, 0.8)
        and clip_action(NavAction(0.0, 0.0), 0.3) == NavAction(0.0, 0.0)
        and clip_action(NavAction(0.2999999, -1.0), 0.3) == NavAction(0.0, 0.0)
        and clip_action(NavAction(0.5, 1.0), 0.3) == NavAction(0.5, 1.0)
    )
    report("action clip rule (zero below 0.3 m/s, boundary passes)", cases_ok)


def test_orca_safety_and_symmetry():
    """100 seeded crowd-only episodes: zero penetrations; mirror head-on."""
    start = time.perf_counter()
    penetrations = 0
    for ep in range(100):
        rng = np.random.default_rng(5000 + ep)
        peds = []
        while len(peds) < 4:
            pos = Vec2(*rng.uniform(-4.5, 4.5, 2))
            if all((pos - q.position).norm() >= 0.6 for q in peds):
                peds.append(
                    PedestrianState(
                        pos,
                        Vec2(0.0, 0.0),
                        0.3,
                        float(rng.uniform(0.8, 1.2)),
                        Vec2(*rng.uniform(-4.5, 4.5, 2)),
                    )
                )
        crowd = CrowdState(peds, rng)
        for _ in range(200):
            crowd = step_crowd(crowd, None, [], 0.2)
            penetrations += pairwise_penetrations(crowd.pedestrians)

    params = OrcaParams()
    a_pos, b_pos = Vec2(-2.0, 0.0), Vec2(2.0, 0.0)
    a_vel = b_vel = Vec2(0.0, 0.0)
    worst_mirror = 0.0
    for _ in range(100):
        a = AgentDisc(a_pos, a_vel, 0.3, 1.0)
        b = AgentDisc(b_pos, b_vel, 0.3, 1.0)

        def pref(pos, goal):
            to = goal - pos
            d = to.norm()
            return to * (1.0 / d) if d > 0.2 else to * 5.0

        na = orca_velocity(a, [b], [], pref(a_pos, Vec2(5.0, 0.0)), params)
        nb = orca_velocity(b, [a], [], pref(b_pos, Vec2(-5.0, 0.0)), params)
        a_pos, b_pos = a_pos + na * 0.2, b_pos + nb * 0.2
        a_vel, b_vel = na, nb
        worst_mirror = max(
            worst_mirror,
            abs(a_pos.x + b_pos.x),
            abs(a_pos.y + b_pos.y),
            abs(a_vel.x + b_vel.x),
            abs(a_vel.y + b_vel.y),
        )
    elapsed = time.perf_counter() - start
    report(
        "crowd safety (zero penetrations over 100 episodes; head-on mirror 1e-9; < 30 s)",
        penetrations == 0 and worst_mirror <= 1e-9 and elapsed < 30.0,
        f"penetrations {penetrations}, mirror {worst_mirror:.2e}, {elapsed:.1f} s",
    )


def test_kinematics_convergence_order():
    """Euler vs exact arc: halving dt halves the endpoint error (factor 1.8-2.2)."""
    rng = np.random.default_rng(77)
    total_time = 2.0
    ratios = []
    for _ in range(100):
        v = float(rng.uniform(0.05, 0.5))
        w = float(rng.uniform(0.1, 1.0)) * (1.0 if rng.random() < 0.5 else -1.0)
        theta0 = float(rng.uniform(-3, 3))

        def endpoint_error(dt):
            pose = Pose2(Vec2(0.0, 0.0), theta0)
            for _ in range(round(total_time / dt)):
                pose = step_differential(pose, NavAction(v, w), dt)
            ex = (v / w) * (math.sin(theta0 + w * total_time) - math.sin(theta0))
            ey = -(v / w) * (math.cos(theta0 + w * total_time) - math.cos(theta0))
            return math.hypot(pose.position.x - ex, pose.position.y - ey)

        ratios.append(endpoint_error(0.02) / endpoint_error(0.01))
    ok = all(1.8 <= r <= 2.2 for r in ratios)
    report(
        "kinematics first-order convergence (error ratio in [1.8, 2.2] x100)",
        ok,
        f"ratio range [{min(ratios):.3f}, {max(ratios):.3f}]",
    )


def test_baseline_quality_bounds(dwa_benchmark_500):
    """DWA and ORCA-as-ego over 500 identical seeded scenarios."""
    dwa, _ = dwa_benchmark_500
    orca = run_benchmark(ScenarioConfig(), "orca", 500, 0, workers=BENCH_WORKERS)
    dwa_ok = (
        dwa.sr >= 0.80
        and dwa.cr <= 0.10
        and dwa.nt_mean_s is not None
        and 14.0 <= dwa.nt_mean_s <= 26.0
        and dwa.n_failures == 0
    )
    orca_ok = orca.sr >= 0.70 and orca.cr <= 0.05 and orca.n_failures == 0
    report(
        "baseline quality (DWA SR>=0.80 CR<=0.10 NT in [14,26]; ORCA SR>=0.70 CR<=0.05)",
        dwa_ok and orca_ok,
        f"dwa SR {dwa.sr:.3f} CR {dwa.cr:.3f} NT {dwa.nt_mean_s:.2f}; "
        f"orca SR {orca.sr:.3f} CR {orca.cr:.3f}",
    )


def test_bench_determinism_across_worker_counts():
    """Equal inputs give byte-identical metrics JSON at any worker count."""
    config = ScenarioConfig()
    runs = [
        run_benchmark(config, "dwa", 16, 42, workers=1),
        run_benchmark(config, "dwa", 16, 42, workers=1),
        run_benchmark(config, "dwa", 16, 42, workers=3),
    ]
    payloads = {r.to_json() for r in runs}
    report(
        "benchmark determinism (byte-identical JSON, any worker count)",
        len(payloads) == 1,
        f"{len(payloads)} distinct payloads",
    )


def test_throughput_500_trial_dwa(dwa_benchmark_500):
    """The full 500-trial DWA benchmark fits the 120 s desktop budget."""
    _, elapsed = dwa_benchmark_500
    report(
        "throughput (500-trial DWA benchmark < 120 s)",
        elapsed < 120.0,
        f"{elapsed:.1f} s on {BENCH_WORKERS} worker(s), {os.cpu_count()} core(s)",
    )
