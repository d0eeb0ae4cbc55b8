"""Seeded batch evaluation: SR/CR/TR/NT over many trials of one policy.

Trial i runs on seed base_seed + i, so different policies evaluated with the
same base seed face identical initial configurations trial by trial. Trials
are independent and may run across worker processes; aggregation is ordered
by trial index, which keeps the metrics output byte-identical at any worker
count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .env import EpisodeTrace, run_episode
from .planners import make_policy
from .reward import RewardParams, Terminal
from .scenario import ScenarioConfig, config_digest


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    seed: int
    terminal: str
    steps: int
    nav_time_s: float | None
    min_separation: float
    scene_digest: str
    escape_steps: int = 0
    error: str | None = None


@dataclass
class MetricsReport:
    n_trials: int
    sr: float
    cr: float
    tr: float
    nt_mean_s: float | None
    nt_std_s: float | None
    policy: str
    config_digest: str
    base_seed: int
    per_seed_outcomes: list[TrialOutcome]
    n_failures: int
    geometric_cr: float

    def to_json(self) -> str:
        """Pinned metrics schema; stable byte-for-byte for equal inputs."""
        payload = {
            "n_trials": self.n_trials,
            "sr": self.sr,
            "cr": self.cr,
            "tr": self.tr,
            "nt_mean_s": self.nt_mean_s,
            "nt_std_s": self.nt_std_s,
            "policy": self.policy,
            "config_digest": self.config_digest,
            "base_seed": self.base_seed,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    def table(self) -> str:
        lines = [
            f"policy          : {self.policy}",
            f"trials          : {self.n_trials}  (base seed {self.base_seed})",
            f"success rate    : {self.sr:.3f}",
            f"collision rate  : {self.cr:.3f}  (geometric-overlap diagnostic: {self.geometric_cr:.3f})",
            f"timeout rate    : {self.tr:.3f}",
        ]
        if self.nt_mean_s is not None:
            lines.append(f"nav time        : {self.nt_mean_s:.2f} +/- {self.nt_std_s:.2f} s")
        else:
            lines.append("nav time        : n/a (no successful trials)")
        if self.n_failures:
            lines.append(f"POLICY FAILURES : {self.n_failures}")
        return "\n".join(lines)


def trace_scene_digest(trace: EpisodeTrace) -> str:
    """Spawn-layout hash from a trace: equal digests mean equal initial scenes."""
    first = trace.steps[0]
    parts = [repr((first.ego.position.x, first.ego.position.y, first.ego.heading))]
    parts.append(repr((trace.goal.x, trace.goal.y)))
    parts += [repr((c.center.x, c.center.y, c.radius)) for c in trace.obstacles]
    parts += [repr((p.x, p.y)) for p in first.pedestrians]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def _run_trial(payload: tuple) -> TrialOutcome:
    (index, seed, config, reward, policy_name, policy_params) = payload
    try:
        policy = make_policy(policy_name, policy_params)
        trace = run_episode(config, seed, policy, reward_params=reward)
    except Exception as exc:  # a policy/scenario failure must not abort the batch
        return TrialOutcome(
            index=index,
            seed=seed,
            terminal="failure",
            steps=0,
            nav_time_s=None,
            min_separation=math.nan,
            scene_digest="",
            error=f"{type(exc).__name__}: {exc}",
        )
    return TrialOutcome(
        index=index,
        seed=seed,
        terminal=trace.terminal.value,
        steps=trace.n_steps,
        nav_time_s=trace.nav_time_s if trace.terminal is Terminal.ARRIVAL else None,
        min_separation=trace.min_separation,
        scene_digest=trace_scene_digest(trace),
        escape_steps=getattr(policy, "escape_steps", 0),
    )


def run_benchmark(
    config: ScenarioConfig,
    policy_name: str,
    n_trials: int,
    base_seed: int,
    *,
    policy_params: dict | None = None,
    reward_params: RewardParams | None = None,
    workers: int = 1,
) -> MetricsReport:
    """Evaluate one policy over n_trials seeded episodes and aggregate metrics."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    make_policy(policy_name, policy_params)  # fail fast on bad specs
    reward = reward_params or RewardParams()
    payloads = [
        (i, base_seed + i, config, reward, policy_name, policy_params)
        for i in range(n_trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, n_trials // (workers * 8))
            outcomes = list(pool.map(_run_trial, payloads, chunksize=chunk))
    else:
        outcomes = [_run_trial(p) for p in payloads]
    outcomes.sort(key=lambda o: o.index)

    n = len(outcomes)
    arrivals = [o for o in outcomes if o.terminal == Terminal.ARRIVAL.value]
    collisions = sum(o.terminal == Terminal.COLLISION.value for o in outcomes)
    timeouts = sum(o.terminal == Terminal.TIMEOUT.value for o in outcomes)
    failures = sum(o.terminal == "failure" for o in outcomes)
    geometric = sum(
        1 for o in outcomes if not math.isnan(o.min_separation) and o.min_separation < 0.0
    )

    times = [o.nav_time_s for o in arrivals]
    if times:
        nt_mean = sum(times) / len(times)
        nt_std = math.sqrt(sum((t - nt_mean) ** 2 for t in times) / len(times))
    else:
        nt_mean = None
        nt_std = None

    return MetricsReport(
        n_trials=n,
        sr=len(arrivals) / n,
        cr=collisions / n,
        tr=timeouts / n,
        nt_mean_s=nt_mean,
        nt_std_s=nt_std,
        policy=policy_name,
        config_digest=config_digest(config, reward),
        base_seed=base_seed,
        per_seed_outcomes=outcomes,
        n_failures=failures,
        geometric_cr=geometric / n,
    )
