"""Synthetic dataset generator for tests and demos.

Each frame shows a flat wall, one salient box floating in front of it (the
ground-truth object, absent from the prior occupancy map) and a competing
distractor panel at its own depth.  The distractor is a permanent fixture:
its footprint is marked occupied in the prior map, so every cue except the
change-based one finds it about as interesting as the box.

Score stacks and gradient tensors mimic what a segmentation/classification
net would emit: blobs roughly aligned with the objects plus noise.
Everything is seeded; rerunning with the same arguments reproduces the
dataset byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cnn_pooling import GradientStack, ScoreMapStack, save_gradient_stack, save_score_stack
from .config import PipelineConfig, dump_config
from .image_io import save_depth, save_mask, save_rgb
from .space_saliency import FREE, OCCUPIED, OccupancyGrid, SensorPose, save_grid, save_poses

DEFAULT_FRAMES = 10
DEFAULT_SIZE = (120, 160)
DEFAULT_SEED = 7

_WALL_WORLD_X = 3.6        # wall plane, fixed in the world
_ROBOT_Y = 3.0
_SENSOR_HEIGHT = 1.0
_GRID_RESOLUTION = 0.05
_GRID_CELLS = 120          # 6 m x 6 m room
_FX = 170.0


@dataclass(frozen=True)
class FrameSpec:
    wall_depth: float
    box_depth: float
    distractor_depth: float
    box: tuple[int, int, int, int]         # y0, x0, height, width
    distractor: tuple[int, int, int, int]


def _frame_spec(i: int, h: int, w: int, seed: int) -> FrameSpec:
    rng = np.random.default_rng(seed * 1000 + i)
    wall_depth = 2.4 + 0.05 * (i % 4)
    box_depth = 1.2 + 0.04 * (i % 3)
    # nearer than the box in two of three frames, so the center bias
    # cannot settle the competition by itself
    distractor_depth = 1.0 + 0.15 * (i % 3)
    bh = int(rng.integers(28, 36))
    bw = int(rng.integers(36, 48))
    by = int(rng.integers(h // 2 - bh // 2 - 8, h // 2 - bh // 2 + 9))
    bx = int(rng.integers(w // 2 - bw // 2 - 10, w // 2 - bw // 2 + 11))
    dh, dw = 26, 30
    dy = int(rng.integers(h // 2 - dh // 2 - 10, h // 2 - dh // 2 + 3))
    dx = int(rng.integers(w - dw - 30, w - dw - 12))
    return FrameSpec(
        wall_depth=wall_depth,
        box_depth=box_depth,
        distractor_depth=distractor_depth,
        box=(by, bx, bh, bw),
        distractor=(dy, dx, dh, dw),
    )


def _blob(h: int, w: int, cy: float, cx: float, sy: float, sx: float) -> np.ndarray:
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    return np.exp(-(((ys - cy) / sy) ** 2 + ((xs - cx) / sx) ** 2) / 2.0)


def _rect_center(rect: tuple[int, int, int, int]) -> tuple[float, float]:
    y0, x0, rh, rw = rect
    return y0 + (rh - 1) / 2.0, x0 + (rw - 1) / 2.0


def _mark_rect_cells(
    cells: np.ndarray,
    rect: tuple[int, int, int, int],
    depth: float,
    robot_x: float,
    w: int,
    cx: float,
    margin: int = 1,
) -> None:
    """Rasterize a frontal rectangle's world footprint into occupied cells."""
    _, x0, _, rw = rect
    world_x = robot_x + depth
    ix = math.floor(world_x / _GRID_RESOLUTION)
    v_left = (x0 - cx) * depth / _FX
    v_right = (x0 + rw - 1 - cx) * depth / _FX
    y_hi = _ROBOT_Y - v_left
    y_lo = _ROBOT_Y - v_right
    iy0 = math.floor(y_lo / _GRID_RESOLUTION) - margin
    iy1 = math.floor(y_hi / _GRID_RESOLUTION) + margin
    cells[max(iy0, 0) : iy1 + 1, max(ix - margin, 0) : ix + margin + 1] = OCCUPIED


def make_fixtures(
    out_dir: str | Path,
    frames: int = DEFAULT_FRAMES,
    size: tuple[int, int] = DEFAULT_SIZE,
    seed: int = DEFAULT_SEED,
) -> Path:
    """Generate a complete synthetic dataset; returns its root directory."""
    h, w = size
    cam_cx = (w - 1) / 2.0
    cam_cy = (h - 1) / 2.0
    root = Path(out_dir)
    for sub in ("rgb", "depth", "gt", "scores", "map", "poses"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    specs = [_frame_spec(i, h, w, seed) for i in range(frames)]

    # prior map: room walls + the wall plane + every frame's distractor
    # footprint (a permanent fixture); the box stays absent (it is the change)
    cells = np.full((_GRID_CELLS, _GRID_CELLS), FREE, dtype=np.uint8)
    cells[0, :] = OCCUPIED
    cells[-1, :] = OCCUPIED
    cells[:, 0] = OCCUPIED
    cells[:, -1] = OCCUPIED
    wall_col = int(_WALL_WORLD_X / _GRID_RESOLUTION)
    cells[:, wall_col : wall_col + 2] = OCCUPIED
    for spec in specs:
        robot_x = _WALL_WORLD_X - spec.wall_depth
        _mark_rect_cells(cells, spec.distractor, spec.distractor_depth, robot_x, w, cam_cx)
    grid = OccupancyGrid(resolution=_GRID_RESOLUTION, origin=(0.0, 0.0), cells=cells)
    save_grid(grid, root / "map" / "grid.pgm", root / "map" / "grid.meta")

    poses: dict[str, SensorPose] = {}
    for i, spec in enumerate(specs):
        rng = np.random.default_rng(seed * 1000 + i + 500_000)
        frame_id = f"frame{i:03d}"
        by, bx, bh, bw = spec.box
        dy, dx, dh, dw = spec.distractor

        rgb = np.full((h, w, 3), 120.0)
        rgb += rng.uniform(-6, 6, size=(h, w, 3))
        rgb[dy : dy + dh, dx : dx + dw] = [70, 120, 210]
        rgb[by : by + bh, bx : bx + bw] = [198, 66, 52]
        save_rgb(np.clip(rgb, 0, 255).astype(np.uint8), root / "rgb" / f"{frame_id}.png")

        depth = np.full((h, w), spec.wall_depth)
        depth[dy : dy + dh, dx : dx + dw] = spec.distractor_depth
        depth[by : by + bh, bx : bx + bw] = spec.box_depth
        save_depth(depth, root / "depth" / f"{frame_id}.png")

        mask = np.zeros((h, w), dtype=bool)
        mask[by : by + bh, bx : bx + bw] = True
        save_mask(mask, root / "gt" / f"{frame_id}.png")

        bcy, bcx = _rect_center(spec.box)
        dcy, dcx = _rect_center(spec.distractor)
        box_blob = _blob(h, w, bcy + rng.uniform(-2, 2), bcx + rng.uniform(-2, 2), bh * 0.55, bw * 0.55)
        dis_blob = _blob(h, w, dcy, dcx, dh * 0.6, dw * 0.6)
        scores = np.stack(
            [
                3.0 * box_blob + rng.normal(0, 0.08, (h, w)),
                2.2 * dis_blob + rng.normal(0, 0.08, (h, w)),
                rng.normal(0, 0.08, (h, w)),
            ]
        )
        background = 2.0 - 2.2 * box_blob - 1.6 * dis_blob + rng.normal(0, 0.08, (h, w))
        stack = ScoreMapStack(
            scores=scores,
            background=background,
            class_names=("crate", "panel", "clutter"),
        )
        save_score_stack(stack, root / "scores", frame_id)

        tensors = {}
        for layer, stride in ((3, 4), (4, 8), (5, 16)):
            lh, lw = h // stride, w // stride
            for c, (blob, amp) in enumerate(
                ((box_blob, 0.9), (dis_blob, 0.7), (None, 0.0))
            ):
                small = (
                    blob[::stride, ::stride][:lh, :lw] * amp if blob is not None else np.zeros((lh, lw))
                )
                chans = [
                    np.abs(small * (1.0 - 0.15 * k) + rng.normal(0, 0.015, (lh, lw)))
                    for k in range(4)
                ]
                tensors[(layer, c)] = np.stack(chans)
        gstack = GradientStack(
            layers=(3, 4, 5),
            class_labels=("crate", "panel", "clutter"),
            frame_shape=(h, w),
            tensors=tensors,
        )
        save_gradient_stack(gstack, root / "gbp" / frame_id)

        robot_x = _WALL_WORLD_X - spec.wall_depth
        poses[frame_id] = SensorPose(
            x=robot_x, y=_ROBOT_Y, theta=0.0, sensor_height=_SENSOR_HEIGHT, sensor_tilt=0.0
        )

    save_poses(poses, root / "poses" / "poses.txt")

    config = PipelineConfig(
        camera_fx=_FX,
        camera_fy=_FX,
        camera_cx=cam_cx,
        camera_cy=cam_cy,
        normal_radius=0.06,
    )
    (root / "config.txt").write_text(dump_config(config))
    return root
