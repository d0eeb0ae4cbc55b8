"""Command-line interface: run one episode, benchmark a policy, replay a trace.

Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import run_benchmark
from .env import PolicyError, ScenarioGenerationError, run_episode
from .planners import POLICY_NAMES, make_policy
from .reward import RewardParams
from .scenario import ConfigError, ScenarioConfig, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

EGO_DRAW_RADIUS = 0.3
PED_DRAW_RADIUS = 0.3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario config JSON (defaults built in)")
    parser.add_argument(
        "--policy", default="dwa", choices=POLICY_NAMES, help="planner to drive the ego"
    )
    parser.add_argument(
        "--policy-params",
        default=None,
        help='inline JSON with planner parameters, e.g. \'{"v_samples": 15}\'',
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socnavsim",
        description="2D social-navigation simulator: episodes, benchmarks, trace replay",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one episode and export its JSONL trace")
    _add_common(p_run)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default="episode.jsonl", help="trace output path")

    p_bench = sub.add_parser("bench", help="seeded multi-trial benchmark with SR/CR/TR/NT")
    _add_common(p_bench)
    p_bench.add_argument("--trials", type=int, default=500)
    p_bench.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    p_bench.add_argument("--out", default=None, help="metrics JSON output path")
    p_bench.add_argument("--workers", type=int, default=1)

    p_replay = sub.add_parser("replay", help="render a JSONL trace as SVG and/or text")
    p_replay.add_argument("--trace", required=True, help="trace JSONL from `run`")
    p_replay.add_argument("--svg", default=None, help="SVG output path")
    p_replay.add_argument("--text", action="store_true", help="dump per-step lines to stdout")
    p_replay.add_argument("--stride", type=int, default=5, help="draw every k-th step")
    return parser


def _load_setup(args) -> tuple[ScenarioConfig, RewardParams, dict | None]:
    if args.config:
        config, reward = load_scenario(args.config)
    else:
        config, reward = ScenarioConfig(), RewardParams()
    params = None
    if getattr(args, "policy_params", None):
        try:
            params = json.loads(args.policy_params)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--policy-params is not valid JSON: {exc}") from exc
        if not isinstance(params, dict):
            raise ConfigError("--policy-params must be a JSON object")
    return config, reward, params


def _cmd_run(args) -> int:
    config, reward, params = _load_setup(args)
    policy = make_policy(args.policy, params)
    trace = run_episode(config, args.seed, policy, reward_params=reward)
    trace.write_jsonl(args.out)
    print(
        f"{args.policy} seed={args.seed}: {trace.terminal.value} after {trace.n_steps} steps "
        f"({trace.nav_time_s:.1f} s) -> {args.out}"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    config, reward, params = _load_setup(args)
    report = run_benchmark(
        config,
        args.policy,
        args.trials,
        args.seed,
        policy_params=params,
        reward_params=reward,
        workers=args.workers,
    )
    print(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json())
        print(f"metrics -> {args.out}")
    else:
        sys.stdout.write(report.to_json())
    return EXIT_OK


def _read_trace(path: str) -> tuple[list[dict], dict]:
    steps = []
    summary = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "summary" in obj:
                summary = obj["summary"]
            else:
                steps.append(obj)
    if not steps or summary is None:
        raise ConfigError(f"{path} is not a complete trace (missing steps or summary)")
    return steps, summary


def _svg_scene(steps: list[dict], summary: dict, stride: int) -> str:
    coords = [(s["ego"][0], s["ego"][1]) for s in steps]
    for s in steps:
        coords.extend((p[0], p[1]) for p in s["peds"])
    scene = summary.get("scene", {})
    obstacles = scene.get("obstacles", [])
    coords.extend((o[0], o[1]) for o in obstacles)
    xs = [c[0] for c in coords]
    ys = [c[1] for c in coords]
    pad = 1.0
    x0, y0 = min(xs) - pad, min(ys) - pad
    width, height = max(xs) + pad - x0, max(ys) + pad - y0
    scale = 60.0

    def sx(x: float) -> float:
        return (x - x0) * scale

    def sy(y: float) -> float:
        return (height - (y - y0)) * scale  # flip so +y is up

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * scale:.0f}" '
        f'height="{height * scale:.0f}" viewBox="0 0 {width * scale:.0f} {height * scale:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for ox, oy, orad in obstacles:
        parts.append(
            f'<circle cx="{sx(ox):.1f}" cy="{sy(oy):.1f}" r="{orad * scale:.1f}" '
            'fill="#9fd8e8" stroke="#2b7a8c"/>'
        )
    goal = scene.get("goal")
    if goal:
        parts.append(
            f'<circle cx="{sx(goal[0]):.1f}" cy="{sy(goal[1]):.1f}" r="{0.15 * scale:.1f}" '
            'fill="#2ca02c"/>'
        )
    path = " ".join(f"{sx(s['ego'][0]):.1f},{sy(s['ego'][1]):.1f}" for s in steps)
    parts.append(f'<polyline points="{path}" fill="none" stroke="#d62728" stroke-width="1.5"/>')
    n = len(steps)
    for i in range(0, n, max(1, stride)):
        s = steps[i]
        opacity = 0.15 + 0.85 * (i / max(1, n - 1))
        parts.append(
            f'<circle cx="{sx(s["ego"][0]):.1f}" cy="{sy(s["ego"][1]):.1f}" '
            f'r="{EGO_DRAW_RADIUS * scale:.1f}" fill="#d62728" fill-opacity="{opacity:.2f}"/>'
        )
        for p in s["peds"]:
            parts.append(
                f'<circle cx="{sx(p[0]):.1f}" cy="{sy(p[1]):.1f}" '
                f'r="{PED_DRAW_RADIUS * scale:.1f}" fill="none" stroke="#1f77b4" '
                f'stroke-opacity="{opacity:.2f}" stroke-width="1.5"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_replay(args) -> int:
    steps, summary = _read_trace(args.trace)
    if args.text:
        for s in steps:
            peds = " ".join(f"({p[0]:.2f},{p[1]:.2f})" for p in s["peds"])
            print(
                f"t={s['t']:4d} ego=({s['ego'][0]:.2f},{s['ego'][1]:.2f},{s['ego'][2]:.2f}) "
                f"action=({s['action'][0]:.2f},{s['action'][1]:.2f}) "
                f"reward={s['reward']:+.3f} terminal={s['terminal']} peds: {peds}"
            )
        print(f"summary: {json.dumps(summary)}")
    if args.svg:
        Path(args.svg).write_text(_svg_scene(steps, summary, args.stride))
        print(f"scene -> {args.svg}")
    if not args.text and not args.svg:
        print("nothing to do: pass --svg PATH and/or --text", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return int(exc.code) if exc.code else EXIT_OK
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_replay(args)
    except (ConfigError, FileNotFoundError, ScenarioGenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PolicyError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
