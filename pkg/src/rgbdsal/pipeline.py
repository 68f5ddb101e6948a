"""End-to-end frame and dataset runners.

Dataset layout (paired directories, matched by frame id):

    root/
      rgb/<id>.png        8-bit RGB frames
      depth/<id>.png      16-bit grayscale depth (millimeters by default)
      gt/<id>.png         binary ground truth (optional, needed for AUC)
      scores/<id>.manifest + <id>.smt        per-class score stacks
      gbp/<id>/gradients.manifest + *.smt    guided-backprop tensors
      map/grid.pgm + grid.meta               prior occupancy grid (optional)
      poses/poses.txt                        per-frame sensor poses (optional)

Each frame writes its final map plus every intermediate cue and a
provenance manifest (config dump + input hashes) sufficient to reproduce
the output bit-exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .cnn_pooling import (
    gbp_saliency,
    load_gradient_stack,
    load_score_stack,
    nonobjectness_saliency,
    objectness_saliency,
)
from .config import PipelineConfig, dump_config
from .core import CameraIntrinsics, depth_to_cloud, fill_zero_depth, validate_salmap
from .depth_saliency import dct_patch_saliency
from .evaluation import BenchmarkReport, evaluate_dataset
from .fusion import fuse_final, fuse_rgb, fuse_rgbd
from .geometry import CenterBiasParams, center_bias, estimate_normals, normal_saliency
from .image_io import (
    load_depth,
    load_mask,
    load_rgb,
    save_salmap_color_png,
    save_salmap_png,
)
from .space_saliency import change_map, load_grid, load_poses, project_cloud, space_saliency
from .tensor_io import read_tensor, write_tensor
from .wavelet_saliency import wt_saliency

log = logging.getLogger(__name__)

INTERMEDIATE_NAMES = ("s_rgb_td", "s_rgb_bu", "s_rgb", "s_d", "w_cb", "s_n", "s_sbs", "s_rgbd")


@dataclass(frozen=True)
class FrameInputs:
    """Resolved input paths for one frame; optional inputs may be None."""

    frame_id: str
    rgb: Path
    depth: Path
    gt: Path | None = None
    scores_manifest: Path | None = None
    gbp_manifest: Path | None = None
    grid_pgm: Path | None = None
    grid_meta: Path | None = None
    poses: Path | None = None


def discover_frame(root: str | Path, frame_id: str) -> FrameInputs:
    root = Path(root)
    rgb = root / "rgb" / f"{frame_id}.png"
    depth = root / "depth" / f"{frame_id}.png"
    for required in (rgb, depth):
        if not required.exists():
            raise FileNotFoundError(f"frame {frame_id}: missing required input {required}")

    def optional(p: Path) -> Path | None:
        return p if p.exists() else None

    return FrameInputs(
        frame_id=frame_id,
        rgb=rgb,
        depth=depth,
        gt=optional(root / "gt" / f"{frame_id}.png"),
        scores_manifest=optional(root / "scores" / f"{frame_id}.manifest"),
        gbp_manifest=optional(root / "gbp" / frame_id / "gradients.manifest"),
        grid_pgm=optional(root / "map" / "grid.pgm"),
        grid_meta=optional(root / "map" / "grid.meta"),
        poses=optional(root / "poses" / "poses.txt"),
    )


def list_frames(root: str | Path) -> list[str]:
    rgb_dir = Path(root) / "rgb"
    if not rgb_dir.is_dir():
        raise FileNotFoundError(f"dataset has no rgb/ directory under {root}")
    return sorted(p.stem for p in rgb_dir.glob("*.png"))


def _top_down_saliency(config: PipelineConfig, inputs: FrameInputs) -> np.ndarray:
    if config.variant == "gbp":
        if inputs.gbp_manifest is None:
            raise FileNotFoundError(
                f"frame {inputs.frame_id}: variant 'gbp' needs gradient manifest "
                f"gbp/{inputs.frame_id}/gradients.manifest"
            )
        stack = load_gradient_stack(inputs.gbp_manifest)
        return gbp_saliency(stack, top_k=config.gbp_topk, scale=config.gbp_scale)
    if inputs.scores_manifest is None:
        raise FileNotFoundError(
            f"frame {inputs.frame_id}: variant {config.variant!r} needs score manifest "
            f"scores/{inputs.frame_id}.manifest"
        )
    stack = load_score_stack(inputs.scores_manifest)
    if config.variant == "objectness":
        return objectness_saliency(stack)
    return nonobjectness_saliency(stack)


def _space_based_saliency(
    config: PipelineConfig, inputs: FrameInputs, cloud_raw, cloud_filled
) -> np.ndarray:
    zero = np.zeros(cloud_filled.shape, dtype=np.float64)
    if inputs.grid_pgm is None or inputs.grid_meta is None or inputs.poses is None:
        log.info("frame %s: no prior map/pose, space-based saliency is zero", inputs.frame_id)
        return zero
    poses = load_poses(inputs.poses)
    if inputs.frame_id not in poses:
        log.info("frame %s: no pose record, space-based saliency is zero", inputs.frame_id)
        return zero
    grid = load_grid(inputs.grid_pgm, inputs.grid_meta)
    cells = project_cloud(
        cloud_raw, poses[inputs.frame_id], grid, height_ceiling=config.space_height_ceiling
    )
    change = change_map(
        cells,
        grid,
        occupied_min_points=config.space_occupied_min_points,
        smoothing_sigma=config.space_smoothing_sigma,
    )
    return space_saliency(change, cloud_filled, eta=config.eta)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def compute_frame(
    config: PipelineConfig, inputs: FrameInputs, with_space: bool = False
) -> dict[str, np.ndarray]:
    """Run the full cue cascade for one frame; returns all maps keyed by name."""
    rgb = load_rgb(inputs.rgb)
    depth = load_depth(inputs.depth, scale=config.depth_scale)
    if rgb.shape[:2] != depth.shape:
        raise ValueError(
            f"frame {inputs.frame_id}: rgb {rgb.shape[:2]} and depth {depth.shape} extents differ"
        )
    intrinsics = CameraIntrinsics(
        fx=config.camera_fx, fy=config.camera_fy, cx=config.camera_cx, cy=config.camera_cy
    )

    s_rgb_td = _top_down_saliency(config, inputs)
    s_rgb_bu = wt_saliency(rgb, levels=config.wavelet_levels)
    s_rgb = fuse_rgb(s_rgb_td, s_rgb_bu, alpha=config.alpha)

    depth_filled = fill_zero_depth(depth)
    sigma_w = config.patch_sigma_w if config.patch_sigma_w > 0 else None
    s_d = dct_patch_saliency(
        depth_filled,
        patch_size=config.patch_size,
        coeff_count=config.patch_coeffs,
        sigma_w=sigma_w,
    )

    cloud_filled = depth_to_cloud(depth_filled, intrinsics)
    cloud_raw = depth_to_cloud(depth, intrinsics)
    w_cb = center_bias(
        cloud_filled,
        CenterBiasParams(c_h=config.c_h, c_v=config.c_v, eta=config.eta),
        literal=config.centerbias_literal,
    )
    normals = estimate_normals(cloud_raw, radius=config.normal_radius)
    normal_result = normal_saliency(
        normals,
        peak_threshold=config.normal_peak_threshold,
        peak_radius=config.normal_peak_radius,
    )
    if normal_result.degenerate:
        log.info("frame %s: degenerate normal distribution, flat normal cue", inputs.frame_id)
    s_n = normal_result.salmap

    if with_space:
        s_sbs = _space_based_saliency(config, inputs, cloud_raw, cloud_filled)
    else:
        s_sbs = np.zeros(depth.shape, dtype=np.float64)

    s_rgbd = fuse_rgbd(
        s_rgb, s_d, w_cb, s_n, alpha=config.alpha, exponent_floor=config.eps_exp
    )
    final = fuse_final(s_rgbd, s_sbs)

    maps = {
        "s_rgb_td": s_rgb_td,
        "s_rgb_bu": s_rgb_bu,
        "s_rgb": s_rgb,
        "s_d": s_d,
        "w_cb": w_cb,
        "s_n": s_n,
        "s_sbs": s_sbs,
        "s_rgbd": s_rgbd,
        "final": final,
    }
    for name, m in maps.items():
        assert validate_salmap(m, name) is not None
    return maps


def run_frame(
    config: PipelineConfig,
    inputs: FrameInputs,
    out_dir: str | Path,
    with_space: bool = False,
    force: bool = False,
) -> Path:
    """Compute one frame and write its artifacts; returns the frame output dir.

    Skips recomputation when the final tensor already exists, unless forced.
    """
    frame_dir = Path(out_dir) / inputs.frame_id
    final_tensor = frame_dir / "final.smt"
    if final_tensor.exists() and not force:
        log.info("frame %s: output exists, skipping (use force to recompute)", inputs.frame_id)
        return frame_dir
    maps = compute_frame(config, inputs, with_space=with_space)
    frame_dir.mkdir(parents=True, exist_ok=True)
    for name in INTERMEDIATE_NAMES:
        save_salmap_png(maps[name], frame_dir / f"{name}.png")
    save_salmap_png(maps["final"], frame_dir / "final.png")
    save_salmap_color_png(maps["final"], frame_dir / "final_color.png")
    write_tensor(maps["final"], final_tensor)

    hashed = {}
    for p in (
        inputs.rgb,
        inputs.depth,
        inputs.gt,
        inputs.scores_manifest,
        inputs.gbp_manifest,
        inputs.grid_pgm,
        inputs.grid_meta,
        inputs.poses,
    ):
        if p is not None:
            hashed[str(p)] = _sha256(p)
    manifest = {
        "frame_id": inputs.frame_id,
        "package_version": __version__,
        "with_space_saliency": with_space,
        "config": dump_config(config),
        "input_sha256": hashed,
        "final_sha256": _sha256(final_tensor),
    }
    (frame_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return frame_dir


def run_dataset(
    config: PipelineConfig,
    root: str | Path,
    out_dir: str | Path,
    with_space: bool = False,
    force: bool = False,
    jobs: int = 1,
) -> BenchmarkReport:
    """Run every frame of a dataset, then benchmark against ground truth.

    Frames that fail to process are logged and reported as skipped; an empty
    dataset is an error.
    """
    root = Path(root)
    out_dir = Path(out_dir)
    frame_ids = list_frames(root)
    if not frame_ids:
        raise ValueError(f"run_dataset: no frames under {root}/rgb")

    def process(frame_id: str) -> tuple[str, np.ndarray | None, np.ndarray | None, str | None]:
        try:
            inputs = discover_frame(root, frame_id)
            frame_dir = run_frame(config, inputs, out_dir, with_space=with_space, force=force)
            final = read_tensor(frame_dir / "final.smt").astype(np.float64)
            mask = load_mask(inputs.gt) if inputs.gt is not None else None
            return frame_id, final, mask, None
        except Exception as exc:  # noqa: BLE001 - a corrupt frame must not kill the run
            log.warning("frame %s failed: %s", frame_id, exc)
            return frame_id, None, None, str(exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(process, frame_ids))
    else:
        results = [process(fid) for fid in frame_ids]

    entries = []
    errors = []
    for frame_id, final, mask, err in results:
        if err is not None:
            errors.append((frame_id, err))
        elif mask is None:
            errors.append((frame_id, "no ground truth mask"))
        else:
            entries.append((frame_id, final, mask))
    report = evaluate_dataset(entries, thresholds=config.eval_thresholds) if entries else None
    if report is None:
        raise ValueError("run_dataset: no frame produced an evaluable map")
    report = dataclasses.replace(report, skipped=report.skipped + tuple(errors))
    report.to_csv(out_dir / "report.csv")
    (out_dir / "summary.txt").write_text(report.summary_text() + "\n")
    return report
