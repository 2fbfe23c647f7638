"""Command line: frame generation and classifier training/export.

  mmtstub generate --labels labels.csv --gps gps.csv --out frames/ [--seed N]
  mmtstub train --frames frames/ --out predictions.csv [--split 0.9] [--l 14]

Exit codes: 0 success, 2 bad arguments or data.
"""

from __future__ import annotations

import argparse
import sys

from .errors import StubError
from .frames import generate_frames, load_frames
from .train import train_and_export


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mmtstub")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="synthesize frames from exported traces")
    p_gen.add_argument("--labels", required=True)
    p_gen.add_argument("--gps", required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int, default=0)

    p_train = sub.add_parser("train", help="train the group classifier and export predictions")
    p_train.add_argument("--frames", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--split", type=float, default=0.9)
    p_train.add_argument("--l", type=int, default=14)
    p_train.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            frames = generate_frames(args.labels, args.gps, args.out, seed=args.seed)
            print(f"wrote {len(frames)} frames to {args.out}")
        else:
            frames = load_frames(args.frames)
            report = train_and_export(frames, args.out, split=args.split,
                                      l=args.l, seed=args.seed)
            print(f"validation_accuracy={report.val_accuracy:.4f} "
                  f"captured_variance={report.captured_variance:.4f} "
                  f"train={report.n_train} val={report.n_val} csv={report.csv_path}")
    except StubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
