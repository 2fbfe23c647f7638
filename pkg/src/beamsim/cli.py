"""Command-line experiment runner.

Subcommands:
  run          train the configured method, write reward_curve.csv + logs
  sweep-users  spectral efficiency vs user count for all three methods
  accuracy     top-k beam selection accuracy table, plus step-time report
  calibrate    export oracle group labels and GPS traces (external-model bridge)

Exit codes: 0 success, 2 bad configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import ConfigurationError, DataError
from .experiment import cmd_accuracy, cmd_calibrate, cmd_run, cmd_sweep_users


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamsim")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None,
                       help="JSON config; omit for the reference defaults")
        p.add_argument("--out", type=str, required=True, help="output directory")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--rounds", type=int, default=None,
                       help="override the Monte Carlo round count")
        p.add_argument("--method", type=str, default=None,
                       choices=["mmt-rl", "rl-only", "mmt-only"])
        p.add_argument("--predictions", type=str, default=None,
                       help="prediction-stream CSV; activates the file predictor")

    p_run = sub.add_parser("run", help="train one method and log reward curves")
    common(p_run)

    p_sweep = sub.add_parser("sweep-users", help="SE vs number of users, all methods")
    common(p_sweep)
    p_sweep.add_argument("--users", type=str, default="5,10,15,20,25",
                         help="comma-separated user counts")

    p_acc = sub.add_parser("accuracy", help="top-k accuracy table, all methods")
    common(p_acc)
    p_acc.add_argument("--k-max", type=int, default=5)

    p_cal = sub.add_parser("calibrate", help="export oracle labels and GPS traces")
    common(p_cal)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.rounds is not None:
        if args.rounds < 1:
            raise ConfigurationError("rounds must be positive")
        cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, rounds=args.rounds))
    if args.method is not None:
        cfg = cfg.with_method(args.method)
    if args.predictions is not None:
        cfg = dataclasses.replace(
            cfg, predictor=dataclasses.replace(cfg.predictor, kind="file",
                                               path=args.predictions))
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
        out_dir = Path(args.out)
        if args.command == "run":
            result = cmd_run(cfg, out_dir, args.seed)
            print(f"method={cfg.run.method} rounds={cfg.run.rounds} "
                  f"episodes={cfg.run.episodes} "
                  f"final_mean_cum_reward={result.reward_mean[-1]:.4f} "
                  f"step_time_ms={result.step_time_ms:.4f}")
        elif args.command == "sweep-users":
            users = [int(tok) for tok in args.users.split(",") if tok]
            if not users or any(u < 1 for u in users):
                raise ConfigurationError(f"invalid user list {args.users!r}")
            results = cmd_sweep_users(cfg, users, out_dir, args.seed)
            for n_ue in users:
                r = results[n_ue]
                print(f"n_ue={n_ue} se_mmt_rl={r['mmt-rl'].eval_se.mean():.6g} "
                      f"se_mmt={r['mmt-only'].eval_se.mean():.6g} "
                      f"se_rl={r['rl-only'].eval_se.mean():.6g}")
        elif args.command == "accuracy":
            results = cmd_accuracy(cfg, args.k_max, out_dir, args.seed)
            step_ms = results["mmt-rl"].step_time_ms
            print(f"rl_step_time_ms={step_ms:.4f}")
            for k in range(1, args.k_max + 1):
                print(f"k={k} acc_mmt_rl={results['mmt-rl'].topk(k):.4f} "
                      f"acc_mmt={results['mmt-only'].topk(k):.4f} "
                      f"acc_rl={results['rl-only'].topk(k):.4f}")
        elif args.command == "calibrate":
            labels, gps = cmd_calibrate(cfg, out_dir, args.seed)
            print(f"labels={labels} gps={gps}")
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigurationError(f"unknown command {args.command!r}")
    except (ConfigurationError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
