"""
Command-line entry point: ``python -m src.cli <command> ...``.

Commands:
    gen-data        collect an offline dataset and print its audit as JSON
    train-trajnet   stage 1: train a TrajNet
    train-policy    stage 2: train a policy over a frozen TrajNet
    eval            best-of-last-five evaluation over one or more runs
    viz-future      decode the future a TrajNet imagines from one history
    sweep           train one TrajNet per value of a trajnet hyperparameter
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, List, Optional

from ..data import load_dataset
from ..envs import MazeSpec, audit, collect_dataset, make_env
from ..evaluation import RunRecord, aggregate_seeds, evaluate_run
from ..policy import Conditioning, train_policy
from ..trajnet import TrajNetConfig, check_compatible, load_trajnet, train_trajnet
from ..utils.error import PipelineError, UsageError
from ..utils.log import configure_logging, get_logger
from ..utils.run_dir import RunDir
from .config import RunConfig
from .viz import decode_future, write_future_csv, write_future_svg

log = get_logger("cli")


def cmd_gen_data(args) -> int:
    config = RunConfig.load(args.config)
    env_cfg = config.env.replace(
        env=args.env or config.env.env,
        layout=args.layout or config.env.layout,
    )
    data_cfg = config.data.replace(
        n_trajectories=args.n or config.data.n_trajectories,
        style=args.style or config.data.style,
    )
    env = make_env(env_cfg.env, env_cfg.layout, env_cfg.episode_cap)
    path = collect_dataset(env, data_cfg, args.seed, args.out)
    summary = audit(env, load_dataset(path).trajectories)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_train_trajnet(args) -> int:
    config = RunConfig.load(args.config)
    dataset = load_dataset(args.data)
    resolved = config.resolve(dataset.meta, command="train-trajnet", seed=args.seed,
                              data=str(Path(args.data).resolve()))
    run = RunDir(args.out)
    run.reset_metrics()
    run.clear_checkpoints("trajnet")
    run.write_config(resolved.to_dict())
    result = train_trajnet(resolved.trajnet, dataset, args.seed, run)
    print(result.best_epoch)
    return 0


def cmd_train_policy(args) -> int:
    config = RunConfig.load(args.config)
    policy_cfg = config.policy
    if args.conditioning is not None:
        policy_cfg = policy_cfg.replace(conditioning=Conditioning.parse(args.conditioning))
    dataset = load_dataset(args.data)
    trajnet = None
    if policy_cfg.conditioning is not Conditioning.NONE:
        if args.trajnet is None:
            raise UsageError(f"--conditioning {policy_cfg.conditioning.value} needs --trajnet")
        trajnet = load_trajnet(args.trajnet)
        check_compatible(trajnet, dataset.meta)
        config = replace(config, trajnet=trajnet.config)

    run_fields = {"command": "train-policy", "seed": args.seed, "data": str(Path(args.data).resolve())}
    if trajnet is not None:
        run_fields["trajnet"] = str(Path(args.trajnet).resolve())
    resolved = replace(config, policy=policy_cfg).resolve(dataset.meta, **run_fields)

    run = RunDir(args.out)
    run.reset_metrics()
    run.clear_checkpoints("policy")
    run.write_config(resolved.to_dict())
    result = train_policy(policy_cfg, dataset, args.seed, run, trajnet)
    print(f"{result.epoch_losses[-1]!r}")
    return 0


def cmd_eval(args) -> int:
    runs = [RunDir(path) for path in args.run]
    for run in runs:
        if not run.config_path.exists():
            raise UsageError(f"{run.root} is not a run directory (no resolved-config.json)")
    config = RunConfig.from_dict(runs[0].read_config()).eval
    if args.episodes is not None:
        config = config.replace(n_episodes=args.episodes)

    records: List[RunRecord] = []
    for run in runs:
        run_records = evaluate_run(run, config, args.seeds)
        records.extend(run_records)
        if len(runs) > 1:
            _write_report(run.report_path, run_records, config.n_episodes)
    report = _write_report(Path(args.out) if args.out else runs[0].report_path, records, config.n_episodes)
    print(_format_table(records, report))
    return 0


def _write_report(path: Path, records: List[RunRecord], n_episodes: Optional[int]) -> dict:
    aggregate = aggregate_seeds([r.chosen for r in records])
    report = {**aggregate.to_dict(), "n_episodes": n_episodes, "records": [r.to_dict() for r in records]}
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return report


def _format_table(records: List[RunRecord], report: dict) -> str:
    lines = [f"{'run':<32} {'seed':>6} {'epochs':<20} {'chosen':>8}"]
    for r in records:
        epochs = ",".join(str(e) for e in r.epochs)
        lines.append(f"{Path(r.run).name:<32} {r.eval_seed:>6} {epochs:<20} {r.chosen:>8.2f}")
    lines.append("")
    lines.append(f"mean {report['mean']:.2f}  std {report['std']:.2f}  median {report['median']:.2f}  "
                 f"iqm {report['iqm']:.2f}  n_seeds {report['n_seeds']}")
    return "\n".join(lines)


def cmd_viz_future(args) -> int:
    bundle = load_trajnet(args.trajnet)
    dataset = load_dataset(args.data)
    export = decode_future(bundle, dataset, args.index, args.t, use_goal=not args.no_goal, goal=args.goal)
    out = Path(args.out)
    csv_path = write_future_csv(export, out.with_suffix(".csv"))
    log.info("wrote %s", csv_path)
    if dataset.meta.env_id == "minimaze":
        spec = MazeSpec.named(dataset.meta.layout or "corridor-S", dataset.meta.max_episode_steps)
        svg_path = write_future_svg(export, spec, out.with_suffix(".svg"))
        log.info("wrote %s", svg_path)
    return 0


def cmd_sweep(args) -> int:
    section, _, key = args.key.partition(".")
    if section != "trajnet" or not key:
        raise UsageError(f"--key must name a trajnet hyperparameter (trajnet.<key>), got '{args.key}'")
    config = RunConfig.load(args.config)
    dataset = load_dataset(args.data)
    out = Path(args.out)
    results = []
    for raw in args.values:
        value = _parse_value(raw)
        trajnet_cfg = TrajNetConfig.from_dict({**config.trajnet.to_dict(), key: value})
        swept = replace(config, trajnet=trajnet_cfg)
        resolved = swept.resolve(dataset.meta, command="sweep", seed=args.seed,
                                 data=str(Path(args.data).resolve()), sweep={args.key: value})
        run = RunDir(out / f"{key}-{raw}")
        run.reset_metrics()
        run.clear_checkpoints("trajnet")
        run.write_config(resolved.to_dict())
        result = train_trajnet(resolved.trajnet, dataset, args.seed, run)
        results.append({
            "value": value, "best_epoch": result.best_epoch,
            "best_validation_loss": result.best_loss, "run": str(run.root),
        })
        print(f"{args.key}={raw}\tbest epoch {result.best_epoch}\tvalidation loss {result.best_loss:.6f}")
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.json").open("w", encoding="utf-8") as f:
        json.dump({"key": args.key, "seed": args.seed, "results": results}, f, indent=2, sort_keys=True)
        f.write("\n")
    return 0


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcpc", description="Goal-conditioned predictive coding lab.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("gen-data", help="Collect an offline dataset")
    p.add_argument("--env", choices=["minimaze", "linerun"], help="Environment (default from config)")
    p.add_argument("--layout", help="MiniMaze layout name")
    p.add_argument("--style", choices=["play", "expert"], help="Collector style")
    p.add_argument("--n", type=int, help="Number of trajectories")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="Dataset directory")
    p.add_argument("--config", help="Run config JSON")
    p.set_defaults(handler=cmd_gen_data)

    p = commands.add_parser("train-trajnet", help="Stage 1: train a TrajNet")
    p.add_argument("--config", help="Run config JSON")
    p.add_argument("--data", required=True, help="Dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="Run directory")
    p.set_defaults(handler=cmd_train_trajnet)

    p = commands.add_parser("train-policy", help="Stage 2: train a policy")
    p.add_argument("--config", help="Run config JSON")
    p.add_argument("--data", required=True, help="Dataset directory")
    p.add_argument("--trajnet", help="TrajNet checkpoint (not needed for --conditioning none)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="Run directory")
    p.add_argument("--conditioning", choices=["bottleneck", "explicit-future", "none"])
    p.set_defaults(handler=cmd_train_policy)

    p = commands.add_parser("eval", help="Evaluate the last checkpoints of one or more runs")
    p.add_argument("--run", action="append", required=True, help="Run directory (repeatable)")
    p.add_argument("--episodes", type=int, help="Episodes per checkpoint")
    p.add_argument("--seeds", type=int, nargs="+", default=[0], help="Evaluation seeds")
    p.add_argument("--out", help="Report path (default: <first run>/report.json)")
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("viz-future", help="Export a decoded latent future")
    p.add_argument("--trajnet", required=True, help="TrajNet checkpoint")
    p.add_argument("--data", required=True, help="Dataset directory")
    p.add_argument("--index", type=int, required=True, help="Trajectory index")
    p.add_argument("--t", type=int, required=True, help="Anchor timestep (1-based)")
    p.add_argument("--no-goal", action="store_true", help="Encode without the goal token")
    p.add_argument("--goal", type=float, nargs="+", help="Raw goal to decode toward (x y, or a return)")
    p.add_argument("--out", required=True, help="Output path; .csv and, for MiniMaze, .svg are written")
    p.set_defaults(handler=cmd_viz_future)

    p = commands.add_parser("sweep", help="Train one TrajNet per hyperparameter value")
    p.add_argument("--key", required=True, help="trajnet.<key>, e.g. trajnet.p")
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--config", help="Run config JSON")
    p.add_argument("--data", required=True, help="Dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="Sweep directory")
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except PipelineError as e:
        log.debug("command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
