#!/usr/bin/env python3
"""Generate the synthetic dataset and benchmark every pipeline variant.

Prints a small table of mean AUC per variant, with and without the
space-based cue, mirroring the structure of the published comparisons.

Usage: python scripts/run_synthetic_benchmark.py [workdir]
"""

import dataclasses
import sys
from pathlib import Path

from rgbdsal.config import load_config
from rgbdsal.fixtures import make_fixtures
from rgbdsal.pipeline import run_dataset


def main():
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("benchmark_out")
    dataset = workdir / "dataset"
    if not (dataset / "config.txt").exists():
        make_fixtures(dataset, frames=10)
        print(f"generated dataset under {dataset}")
    config = load_config(dataset / "config.txt")

    rows = []
    for variant in ("objectness", "non-objectness", "gbp"):
        cfg = dataclasses.replace(config, variant=variant)
        plain = run_dataset(cfg, dataset, workdir / f"{variant}_plain", jobs=4)
        spaced = run_dataset(
            cfg, dataset, workdir / f"{variant}_space", with_space=True, jobs=4
        )
        rows.append((variant, plain.mean_auc, spaced.mean_auc))

    print(f"\n{'variant':16s} {'mean AUC':>9s} {'+space':>9s} {'gain':>8s}")
    for variant, auc, auc_s in rows:
        print(f"{variant:16s} {auc:9.4f} {auc_s:9.4f} {auc_s - auc:+8.4f}")


if __name__ == "__main__":
    main()
