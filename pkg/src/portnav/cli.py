"""Command-line entry point: train / evaluate / sweep / replay / audit.

One YAML config file feeds every subcommand; flag overrides win over the
file, the file over built-in defaults (verify with `portnav audit`).  The
PORTNAV_OUT environment variable supplies a default output directory.

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from . import sweep as sweep_mod
from . import trainer
from .config import (
    FullConfig,
    config_hash,
    config_to_dict,
    env_config_from_dict,
    load_config,
    parse_override_value,
)
from .trajectory import ReplayDivergence, TrajectoryWriter, read_log, replay_log
from .world import generate, scene_from_dict, scene_to_dict


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="YAML config file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config entry (repeatable), e.g. --set train.workers=4",
    )


def _resolve_config(args, extra: dict | None = None) -> FullConfig:
    overrides: dict = {}
    for item in args.overrides:
        if "=" not in item:
            raise ValueError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = parse_override_value(value)
    if extra:
        overrides.update({k: v for k, v in extra.items() if v is not None})
    return load_config(args.config, overrides)


def _default_out(args) -> Path:
    if args.out is not None:
        return Path(args.out)
    env_out = os.environ.get("PORTNAV_OUT")
    if env_out:
        return Path(env_out)
    raise ValueError("no output directory: pass --out or set PORTNAV_OUT")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="portnav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a policy and write checkpoint + metrics")
    _add_config_args(p_train)
    p_train.add_argument("--out", type=Path, default=None, help="output directory (or PORTNAV_OUT)")
    p_train.add_argument("--steps", type=int, default=None, help="env step budget")
    p_train.add_argument("--workers", type=int, default=None, help="parallel rollout workers")
    p_train.add_argument("--seed", type=int, default=None, help="master seed")
    p_train.add_argument("--algo", choices=("sac", "baseline"), default=None)

    p_eval = sub.add_parser("evaluate", help="deterministic evaluation of a checkpoint")
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=1_000_000)
    _add_config_args(p_eval)
    p_eval.add_argument("--log", type=Path, default=None, help="write a trajectory log of the evaluation")
    p_eval.add_argument("--scene-out", type=Path, default=None, help="dump the first episode's scene JSON")

    p_sweep = sub.add_parser("sweep", help="robustness sweep of a frozen policy")
    p_sweep.add_argument("--checkpoint", type=Path, required=True)
    p_sweep.add_argument("--param", choices=sweep_mod.SWEEP_PARAMS, required=True)
    p_sweep.add_argument("--grid", type=str, default=None, help="comma-separated explicit grid values")
    p_sweep.add_argument("--grid-min", type=float, default=None)
    p_sweep.add_argument("--grid-max", type=float, default=None)
    p_sweep.add_argument("--grid-points", type=int, default=11)
    p_sweep.add_argument("--grid-scale", choices=("linear", "log"), default=None,
                         help="default: log for turn_rate, linear for mass")
    p_sweep.add_argument("--episodes", type=int, default=20)
    p_sweep.add_argument("--seed", type=int, default=2_000_000)
    p_sweep.add_argument("--out", type=Path, default=None)
    p_sweep.add_argument("--plot", choices=("png", "pdf", "svg", "none"), default="png")
    p_sweep.add_argument("--grid-workers", type=int, default=1, help="evaluate grid points in parallel")

    p_replay = sub.add_parser("replay", help="re-simulate a trajectory log and verify bit-exact poses")
    p_replay.add_argument("--log", type=Path, required=True)
    _add_config_args(p_replay)
    p_replay.add_argument("--scene", type=Path, default=None, help="scene JSON to verify against episode 0")
    p_replay.add_argument("--dump-scene", type=Path, default=None, help="write episode 0's scene JSON")
    p_replay.add_argument("--render", type=Path, default=None, help="render a top-down image of episode 0")

    p_audit = sub.add_parser("audit", help="print the resolved config and its hash")
    _add_config_args(p_audit)

    return parser


def cmd_train(args) -> int:
    extra = {
        "train.total_steps": args.steps,
        "train.workers": args.workers,
        "train.seed": args.seed,
        "train.algo": args.algo,
    }
    cfg = _resolve_config(args, extra)
    out = _default_out(args)
    result = trainer.train(cfg, out)
    print(f"checkpoint: {result.checkpoint_path}")
    print(f"metrics:    {result.metrics_path}")
    if result.final_eval is not None:
        print(f"final eval: success_rate={result.final_eval.success_rate:.3f} "
              f"mean_return={result.final_eval.mean_return:.3f}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args) if (args.config or args.overrides) else None
    agent, meta = trainer.load_agent_checkpoint(args.checkpoint)
    if cfg is not None and config_hash(cfg) != meta["config_hash"]:
        raise trainer.ConfigHashMismatch(
            f"checkpoint config hash {meta['config_hash'][:12]}... does not match "
            f"the supplied config ({config_hash(cfg)[:12]}...)"
        )
    env_cfg = env_config_from_dict(meta["config"]["env"])
    writer = TrajectoryWriter(args.log, meta["config"]) if args.log else None
    try:
        stats = trainer.evaluate_policy(agent.policy_snapshot(), env_cfg, args.episodes, args.seed, writer=writer)
    finally:
        if writer is not None:
            writer.close()
    if args.scene_out:
        scene = generate(args.seed, env_cfg.world)
        args.scene_out.write_text(json.dumps(scene_to_dict(scene)))
    for field in ("mean_return", "std_return", "success_rate", "collision_rate", "mean_length", "n_episodes"):
        print(f"{field}={getattr(stats, field)}")
    return 0


def _sweep_values(args, nominal: float) -> list[float]:
    import numpy as np

    if args.grid is not None:
        return [float(v) for v in args.grid.split(",") if v.strip()]
    if args.grid_min is not None or args.grid_max is not None:
        if args.grid_min is None or args.grid_max is None:
            raise ValueError("--grid-min and --grid-max must be given together")
        scale = args.grid_scale or ("log" if args.param == "turn_rate" else "linear")
        if scale == "log":
            return list(np.geomspace(args.grid_min, args.grid_max, args.grid_points))
        return list(np.linspace(args.grid_min, args.grid_max, args.grid_points))
    mass_grid, turn_grid = sweep_mod.default_grids()
    return list(mass_grid if args.param == "mass" else turn_grid)


def cmd_sweep(args) -> int:
    agent, meta = trainer.load_agent_checkpoint(args.checkpoint)
    env_cfg = env_config_from_dict(meta["config"]["env"])
    nominal = getattr(env_cfg.vessel, args.param)
    spec = sweep_mod.SweepSpec(
        param=args.param,
        values=_sweep_values(args, nominal),
        episodes=args.episodes,
        seed=args.seed,
    )
    curve = sweep_mod.run_sweep(agent.policy_snapshot(), env_cfg, spec, n_workers=args.grid_workers)
    out = _default_out(args)
    plot = None if args.plot == "none" else args.plot
    paths = sweep_mod.write_outputs(curve, out, plot=plot, chash=meta["config_hash"])
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def cmd_replay(args) -> int:
    expected = _resolve_config(args) if (args.config or args.overrides) else None
    report = replay_log(args.log, expected_config=expected)
    print(f"replay ok: {report.episodes} episodes, {report.steps} steps reproduced bit-exactly")

    if args.scene or args.dump_scene or args.render:
        records = read_log(args.log)
        header = records[0]
        env_cfg = env_config_from_dict(header["config"]["env"])
        first_reset = next(r for r in records if r["type"] == "reset")
        scene = generate(first_reset["seed"], env_cfg.world)
        if args.dump_scene:
            args.dump_scene.write_text(json.dumps(scene_to_dict(scene)))
            print(f"scene: {args.dump_scene}")
        if args.scene:
            stored = json.loads(args.scene.read_text())
            scene_from_dict(stored)  # schema check
            if json.dumps(stored, sort_keys=True) != json.dumps(scene_to_dict(scene), sort_keys=True):
                raise RuntimeError(f"scene file {args.scene} does not match the log's episode 0 scene")
            print("scene file matches episode 0")
        if args.render:
            from .plots import plot_scene

            ep0 = first_reset["episode"]
            trace = [r["pose"][:2] for r in records if r["type"] == "step" and r["episode"] == ep0]
            plot_scene(scene, args.render, trace=trace, title="Replayed episode 0")
            print(f"render: {args.render}")
    return 0


def cmd_audit(args) -> int:
    cfg = _resolve_config(args)
    print(yaml.safe_dump(config_to_dict(cfg), sort_keys=True), end="")
    print(f"config_hash: {config_hash(cfg)}")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "replay": cmd_replay,
    "audit": cmd_audit,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ReplayDivergence as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
