#!/usr/bin/env python3
"""Run the three bundled experiment presets and collect their CSV outputs.

Produces, under --out (default ./out):
  fig3a/reward_curve.csv     average cumulative reward per episode (mmt-rl)
  fig3b/se_vs_users.csv      spectral efficiency vs user count, three methods
  fig4c/topk.csv             top-k beam selection accuracy, three methods
"""

import argparse
import sys
from pathlib import Path

from beamsim.cli import main as beamsim_main

ROOT = Path(__file__).resolve().parent.parent


def run(argv) -> None:
    rc = beamsim_main(argv)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    out = Path(args.out)
    configs = ROOT / "configs"

    run(["run", "--config", str(configs / "fig3a_reward.json"),
         "--out", str(out / "fig3a"), "--seed", str(args.seed)])
    run(["sweep-users", "--config", str(configs / "fig3b_sweep.json"),
         "--out", str(out / "fig3b"), "--seed", str(args.seed),
         "--users", "5,10,15,20,25"])
    run(["accuracy", "--config", str(configs / "fig4c_accuracy.json"),
         "--out", str(out / "fig4c"), "--seed", str(args.seed), "--k-max", "5"])
    print(f"wrote {out}/fig3a, {out}/fig3b, {out}/fig4c")


if __name__ == "__main__":
    main()
