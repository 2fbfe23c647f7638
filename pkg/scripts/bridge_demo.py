#!/usr/bin/env python3
"""End-to-end bridge walkthrough: calibration export -> external predictions -> run.

Exports oracle group labels and GPS traces, then (if the mmtstub package is
installed) generates synthetic sensor frames, trains the group classifier,
and replays its prediction stream through the file predictor, comparing the
resulting spectral efficiency against the flat 64-action baseline under
matched seeds.
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

BRIDGE_CONFIG = {
    "scene": {"annulus_m": [150.0, 190.0], "mobility_prob": 0.3},
    "reward": {"mode": "auto", "auto_factor": 0.6},
    "run": {"episodes": 150, "rounds": 1, "eval_ticks": 30},
}


def run(cmd) -> None:
    print("+", " ".join(str(c) for c in cmd))
    subprocess.run([str(c) for c in cmd], check=True)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out/bridge")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(BRIDGE_CONFIG, indent=2))

    run(["beamsim", "calibrate", "--config", cfg_path, "--out", out / "calibration",
         "--seed", args.seed])
    try:
        import mmtstub  # noqa: F401
    except ImportError:
        print("mmtstub not installed; stopping after the calibration export")
        sys.exit(0)
    run(["mmtstub", "generate", "--labels", out / "calibration" / "labels.csv",
         "--gps", out / "calibration" / "gps.csv", "--out", out / "frames",
         "--seed", args.seed])
    run(["mmtstub", "train", "--frames", out / "frames",
         "--out", out / "predictions.csv", "--seed", args.seed])
    run(["beamsim", "run", "--config", cfg_path, "--out", out / "mmt_rl",
         "--seed", args.seed, "--method", "mmt-rl",
         "--predictions", out / "predictions.csv"])
    run(["beamsim", "run", "--config", cfg_path, "--out", out / "rl_only",
         "--seed", args.seed, "--method", "rl-only"])
    for name in ("mmt_rl", "rl_only"):
        manifest = json.loads((out / name / "manifest.json").read_text())
        print(name, "eval SE per round:", manifest["eval_se_per_round"])


if __name__ == "__main__":
    main()
