#!/usr/bin/env python3
"""Sweep the top-down/bottom-up mixing weight and report mean AUC per value.

The published value (0.7) weighs top-down cues more; this sweep shows how
sensitive the synthetic benchmark is to that choice.

Usage: python scripts/sweep_fusion_alpha.py [workdir]
"""

import dataclasses
import sys
from pathlib import Path

from rgbdsal.config import load_config
from rgbdsal.fixtures import make_fixtures
from rgbdsal.pipeline import run_dataset


def main():
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("alpha_sweep_out")
    dataset = workdir / "dataset"
    if not (dataset / "config.txt").exists():
        make_fixtures(dataset, frames=10)
    base = load_config(dataset / "config.txt")

    print(f"{'alpha':>6s} {'mean AUC':>9s}")
    for alpha in (0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0):
        cfg = dataclasses.replace(base, alpha=alpha)
        report = run_dataset(
            cfg, dataset, workdir / f"alpha_{alpha:.1f}", with_space=False, jobs=4
        )
        print(f"{alpha:6.1f} {report.mean_auc:9.4f}")


if __name__ == "__main__":
    main()
