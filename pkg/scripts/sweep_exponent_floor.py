#!/usr/bin/env python3
"""Empirical study of the two ambiguous knobs: the normal-saliency exponent
floor and the literal center-bias expression.

The exponent floor bounds how hard a near-zero normal cue can flatten the
map (0 evaluates the unmodified power law); the literal center-bias flag
evaluates the asymmetric linear form instead of the symmetric quadratic.

Usage: python scripts/sweep_exponent_floor.py [workdir]
"""

import dataclasses
import sys
from pathlib import Path

from rgbdsal.config import load_config
from rgbdsal.fixtures import make_fixtures
from rgbdsal.pipeline import run_dataset


def main():
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("floor_sweep_out")
    dataset = workdir / "dataset"
    if not (dataset / "config.txt").exists():
        make_fixtures(dataset, frames=10)
    base = load_config(dataset / "config.txt")

    print(f"{'eps_exp':>8s} {'literal_cb':>10s} {'mean AUC':>9s}")
    for literal in (False, True):
        for floor in (0.0, 0.05, 0.2, 0.5, 1.0):
            cfg = dataclasses.replace(base, eps_exp=floor, centerbias_literal=literal)
            tag = f"floor_{floor:.2f}_{'lit' if literal else 'quad'}"
            report = run_dataset(cfg, dataset, workdir / tag, with_space=False, jobs=4)
            print(f"{floor:8.2f} {str(literal):>10s} {report.mean_auc:9.4f}")


if __name__ == "__main__":
    main()
