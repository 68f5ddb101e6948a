"""Top-down space-based saliency from changes against a prior 2-D map.

The live organized cloud is rigidly transformed into the world frame using
the recorded sensor pose, dropped onto the ground plane and binned into the
occupancy grid.  Cells that were Free in the prior map but now collect
enough points are "changes" (new objects); the per-pixel change scores,
depth-weighted toward near structure, become the attention map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import OrganizedCloud, minmax_normalize

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

# map-server style PGM gray levels
_PGM_OCCUPIED = 0
_PGM_FREE = 254
_PGM_UNKNOWN = 205

DEFAULT_HEIGHT_CEILING = 2.0
DEFAULT_OCCUPIED_MIN_POINTS = 5
DEFAULT_SMOOTHING_SIGMA = 3.0
UNKNOWN_SCORE = 0.5


@dataclass(frozen=True)
class OccupancyGrid:
    """Prior 2-D map: Free/Occupied/Unknown cells at a fixed resolution.

    ``cells[iy, ix]`` covers world x in [origin_x + ix*res, +res) and y
    likewise; cell (0, 0) starts at the origin.
    """

    resolution: float
    origin: tuple[float, float]
    cells: np.ndarray  # (rows, cols) uint8 of FREE/OCCUPIED/UNKNOWN

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError(f"grid resolution must be positive, got {self.resolution}")
        if self.cells.ndim != 2:
            raise ValueError("grid cells must be 2-D")

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def contains(self, x: float, y: float) -> bool:
        ix = math.floor((x - self.origin[0]) / self.resolution)
        iy = math.floor((y - self.origin[1]) / self.resolution)
        rows, cols = self.cells.shape
        return 0 <= ix < cols and 0 <= iy < rows


def save_grid(grid: OccupancyGrid, pgm_path: str | Path, meta_path: str | Path) -> None:
    """Write the grid as a binary PGM plus a key/value metadata file."""
    gray = np.full(grid.cells.shape, _PGM_UNKNOWN, dtype=np.uint8)
    gray[grid.cells == FREE] = _PGM_FREE
    gray[grid.cells == OCCUPIED] = _PGM_OCCUPIED
    rows, cols = gray.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    Path(pgm_path).write_bytes(header + gray.tobytes())
    Path(meta_path).write_text(
        f"resolution {grid.resolution}\norigin {grid.origin[0]} {grid.origin[1]}\n"
    )


def _read_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    # P5 header: magic, width, height, maxval as whitespace-separated tokens,
    # possibly interleaved with '#' comment lines
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pos += 1  # single whitespace after maxval
    data = np.frombuffer(raw, dtype=np.uint8, count=rows * cols, offset=pos)
    return data.reshape(rows, cols)


def load_grid(pgm_path: str | Path, meta_path: str | Path) -> OccupancyGrid:
    """Read a PGM grid (0=Occupied, 254=Free, 205=Unknown; others Unknown)."""
    gray = _read_pgm(Path(pgm_path))
    meta = {}
    for line in Path(meta_path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, *vals = line.split()
        meta[key] = vals
    if "resolution" not in meta or "origin" not in meta:
        raise ValueError(f"{meta_path}: needs 'resolution' and 'origin' entries")
    cells = np.full(gray.shape, UNKNOWN, dtype=np.uint8)
    cells[gray == _PGM_FREE] = FREE
    cells[gray == _PGM_OCCUPIED] = OCCUPIED
    return OccupancyGrid(
        resolution=float(meta["resolution"][0]),
        origin=(float(meta["origin"][0]), float(meta["origin"][1])),
        cells=cells,
    )


@dataclass(frozen=True)
class SensorPose:
    """Robot ground pose plus the sensor's mounting height and tilt."""

    x: float
    y: float
    theta: float
    sensor_height: float = 0.0
    sensor_tilt: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.theta, self.sensor_height, self.sensor_tilt)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"SensorPose: non-finite field in {vals}")
        theta = math.remainder(self.theta, 2 * math.pi)
        if theta <= -math.pi:
            theta += 2 * math.pi
        object.__setattr__(self, "theta", theta)


def load_poses(path: str | Path) -> dict[str, SensorPose]:
    """Parse per-frame pose records: ``frame_id x y theta sensor_height sensor_tilt``."""
    poses: dict[str, SensorPose] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        poses[parts[0]] = SensorPose(*(float(p) for p in parts[1:]))
    return poses


def save_poses(poses: dict[str, SensorPose], path: str | Path) -> None:
    lines = [
        f"{fid} {p.x} {p.y} {p.theta} {p.sensor_height} {p.sensor_tilt}"
        for fid, p in sorted(poses.items())
    ]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class CellMap:
    """Per-pixel grid cell assignment; ``assigned`` is False where no cell applies."""

    col: np.ndarray       # (H, W) intp, grid x index
    row: np.ndarray       # (H, W) intp, grid y index
    assigned: np.ndarray  # (H, W) bool


def project_cloud(
    cloud: OrganizedCloud,
    pose: SensorPose,
    grid: OccupancyGrid,
    height_ceiling: float = DEFAULT_HEIGHT_CEILING,
) -> CellMap:
    """Bin every valid point into the grid after a rigid transform to world frame.

    The world frame has x forward at theta=0 and z up; a positive sensor tilt
    pitches the optical axis toward the ground.  Points above the height
    ceiling, invalid pixels and points landing outside the grid stay
    unassigned.
    """
    if not grid.contains(pose.x, pose.y):
        raise ValueError(
            f"project_cloud: pose ({pose.x}, {pose.y}) outside grid extent"
        )
    # camera (v right, h down, d forward) -> robot-aligned (x fwd, y left, z up)
    x0 = cloud.d
    y0 = -cloud.v
    z0 = -cloud.h
    ct, st = math.cos(pose.sensor_tilt), math.sin(pose.sensor_tilt)
    x1 = ct * x0 + st * z0
    z1 = -st * x0 + ct * z0 + pose.sensor_height
    cy, sy = math.cos(pose.theta), math.sin(pose.theta)
    xw = cy * x1 - sy * y0 + pose.x
    yw = sy * x1 + cy * y0 + pose.y

    keep = cloud.valid & (z1 <= height_ceiling)
    col = np.floor((xw - grid.origin[0]) / grid.resolution).astype(np.intp)
    row = np.floor((yw - grid.origin[1]) / grid.resolution).astype(np.intp)
    rows, cols = grid.shape
    inside = (col >= 0) & (col < cols) & (row >= 0) & (row < rows)
    assigned = keep & inside
    col = np.where(assigned, col, -1)
    row = np.where(assigned, row, -1)
    return CellMap(col=col, row=row, assigned=assigned)


def change_map(
    cells: CellMap,
    grid: OccupancyGrid,
    occupied_min_points: int = DEFAULT_OCCUPIED_MIN_POINTS,
    smoothing_sigma: float = DEFAULT_SMOOTHING_SIGMA,
) -> np.ndarray:
    """Per-pixel change evidence against the prior map, Gaussian smoothed.

    A pixel scores 1 when its cell was Free but now collects at least
    ``occupied_min_points`` live points (a new object), 0.5 when the cell is
    Unknown, and 0 when consistent with the prior.  Unassigned pixels score 0.
    """
    rows, cols = grid.shape
    counts = np.zeros((rows, cols), dtype=np.int64)
    flat = cells.row[cells.assigned] * cols + cells.col[cells.assigned]
    np.add.at(counts.ravel(), flat, 1)
    evidenced = counts >= occupied_min_points

    scores = np.zeros(cells.assigned.shape, dtype=np.float64)
    r = cells.row[cells.assigned]
    c = cells.col[cells.assigned]
    state = grid.cells[r, c]
    pixel_scores = np.zeros(r.shape, dtype=np.float64)
    pixel_scores[(state == FREE) & evidenced[r, c]] = 1.0
    pixel_scores[state == UNKNOWN] = UNKNOWN_SCORE
    scores[cells.assigned] = pixel_scores
    if smoothing_sigma > 0:
        scores = ndimage.gaussian_filter(scores, sigma=smoothing_sigma)
    return scores


def space_saliency(change: np.ndarray, cloud: OrganizedCloud, eta: float = 0.25) -> np.ndarray:
    """Depth-weighted change map, normalized: nearer changes attract more attention.

    The weight is exp(-(d - d_min) / (2*sigma^2)) with sigma = eta * max(d)
    over the valid depths, mirroring the center-bias depth spread.
    """
    change = np.asarray(change, dtype=np.float64)
    if change.shape != cloud.shape:
        raise ValueError(
            f"space_saliency: change shape {change.shape} != cloud shape {cloud.shape}"
        )
    d = cloud.d
    valid = cloud.valid
    if not np.any(valid):
        return np.zeros_like(change)
    d_min = d[valid].min()
    sigma = eta * d[valid].max()
    weight = np.zeros_like(d)
    weight[valid] = np.exp(-(d[valid] - d_min) / (2.0 * sigma * sigma))
    return minmax_normalize(change * weight)
