"""Command line interface: run the pipeline, evaluate maps, generate fixtures."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import VARIANT_ALIASES, PipelineConfig, load_config
from .evaluation import evaluate_dataset
from .fixtures import DEFAULT_FRAMES, DEFAULT_SEED, make_fixtures
from .image_io import load_mask, load_salmap_png
from .pipeline import discover_frame, list_frames, run_dataset, run_frame
from .tensor_io import read_tensor


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run the saliency pipeline on a frame or dataset")
    p.add_argument("--config", type=Path, help="pipeline config file (defaults used if omitted)")
    p.add_argument("--dataset", type=Path, help="dataset root directory")
    p.add_argument("--frame-id", help="process a single frame id instead of the whole dataset")
    p.add_argument("--variant", choices=sorted(VARIANT_ALIASES), help="override configured variant")
    p.add_argument("--with-space-saliency", action="store_true", help="enable the change-based cue")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--force", action="store_true", help="recompute frames with existing outputs")
    p.add_argument("--jobs", type=int, default=1, help="parallel frame workers")


def _add_eval_parser(sub):
    p = sub.add_parser("eval", help="score predicted maps against ground truth masks")
    p.add_argument("--pred", type=Path, required=True, help="directory of predicted maps (.smt or .png)")
    p.add_argument("--gt", type=Path, required=True, help="directory of ground truth masks (.png)")
    p.add_argument("--report", type=Path, required=True, help="output CSV path")


def _add_fixtures_parser(sub):
    p = sub.add_parser("make-fixtures", help="generate a synthetic test dataset")
    p.add_argument("--out", type=Path, required=True, help="dataset root to create")
    p.add_argument("--frames", type=int, default=DEFAULT_FRAMES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.variant:
        config.variant = VARIANT_ALIASES[args.variant]
        config.validate()
    dataset = args.dataset or (Path(config.dataset_root) if config.dataset_root else None)
    if dataset is None:
        print("run: no dataset given (--dataset or dataset.root in config)", file=sys.stderr)
        return 2
    out = args.out or (Path(config.out_dir) if config.out_dir else dataset / "out")
    if args.frame_id:
        inputs = discover_frame(dataset, args.frame_id)
        frame_dir = run_frame(
            config, inputs, out, with_space=args.with_space_saliency, force=args.force
        )
        print(f"frame {args.frame_id}: wrote {frame_dir}")
        return 0
    report = run_dataset(
        config,
        dataset,
        out,
        with_space=args.with_space_saliency,
        force=args.force,
        jobs=args.jobs,
    )
    print(report.summary_text())
    print(f"report: {out / 'report.csv'}")
    return 0


def _load_prediction(path: Path):
    if path.suffix == ".smt":
        return read_tensor(path).astype(float)
    return load_salmap_png(path)


def _cmd_eval(args) -> int:
    preds = {}
    for p in sorted(args.pred.iterdir()):
        if p.suffix in (".smt", ".png"):
            preds.setdefault(p.stem, p)
    if not preds:
        print(f"eval: no predictions under {args.pred}", file=sys.stderr)
        return 2
    entries = []
    for stem, pred_path in preds.items():
        gt_path = args.gt / f"{stem}.png"
        if not gt_path.exists():
            print(f"eval: no ground truth for {stem}, skipping", file=sys.stderr)
            continue
        entries.append((stem, _load_prediction(pred_path), load_mask(gt_path)))
    if not entries:
        print("eval: nothing to evaluate", file=sys.stderr)
        return 2
    report = evaluate_dataset(entries)
    report.to_csv(args.report)
    summary = report.summary_text()
    args.report.with_suffix(".summary.txt").write_text(summary + "\n")
    print(summary)
    return 0


def _cmd_fixtures(args) -> int:
    root = make_fixtures(args.out, frames=args.frames, seed=args.seed)
    print(f"fixtures: wrote {args.frames} frames under {root}")
    print(f"fixtures: matching config at {root / 'config.txt'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="rgbdsal", description="RGB-D salient object detection pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_eval_parser(sub)
    _add_fixtures_parser(sub)
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_fixtures(args)


if __name__ == "__main__":
    sys.exit(main())
