"""Shared numeric primitives and domain types.

Saliency maps are plain 2-D float64 arrays with values in [0, 1]; depth maps
are 2-D float64 arrays in meters where 0 marks a missing measurement.  The
helpers below define the normalization, exponentiation and resampling
semantics that every downstream stage relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def minmax_normalize(m: np.ndarray) -> np.ndarray:
    """Scale an array to [0, 1] by its own min/max.

    Degenerate (constant) inputs map to all ones when the constant is
    positive and all zeros otherwise, so a uniformly boosted map does not
    vanish while an empty/negative one stays silent.

    Raises:
        ValueError: if the input contains NaN or infinity.
    """
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError("minmax_normalize: input contains non-finite values")
    lo = m.min()
    hi = m.max()
    if hi > lo:
        return (m - lo) / (hi - lo)
    if hi > 0:
        return np.ones_like(m)
    return np.zeros_like(m)


def power_keep_zero(base: np.ndarray, exponent: np.ndarray | float) -> np.ndarray:
    """Elementwise ``base ** exponent`` with 0 ** e defined as 0 for all e.

    The 0**0 convention keeps zero-scoring pixels suppressed when a
    per-pixel exponent map happens to vanish at the same location.
    """
    base = np.asarray(base, dtype=np.float64)
    exponent = np.asarray(exponent, dtype=np.float64)
    out = np.power(base, exponent)
    if base.shape == ():
        return np.float64(0.0) if base == 0 else out
    out[base == 0] = 0.0
    return out


def bilinear_resize(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resample a 2-D grid to (out_h, out_w) with corner-aligned bilinear weights.

    Corner alignment means input and output corners coincide; resizing to the
    same shape is the identity.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"bilinear_resize: expected 2-D array, got ndim={arr.ndim}")
    in_h, in_w = arr.shape
    if out_h < 1 or out_w < 1:
        raise ValueError("bilinear_resize: output extents must be positive")
    ys = np.linspace(0.0, in_h - 1.0, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, in_w - 1.0, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, in_h - 1)
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = arr[np.ix_(y0, x0)] * (1 - wx) + arr[np.ix_(y0, x1)] * wx
    bot = arr[np.ix_(y1, x0)] * (1 - wx) + arr[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def fill_zero_depth(depth: np.ndarray) -> np.ndarray:
    """Replace zero (missing) depths with the minimum positive depth.

    Raises:
        ValueError: if no positive depth exists at all.
    """
    depth = np.asarray(depth, dtype=np.float64)
    positive = depth[depth > 0]
    if positive.size == 0:
        raise ValueError("fill_zero_depth: depth map has no positive measurements")
    out = depth.copy()
    out[out <= 0] = positive.min()
    return out


def validate_salmap(m: np.ndarray, name: str = "saliency map") -> np.ndarray:
    """Check the [0, 1] contract on a saliency map and return it as float64."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name}: expected 2-D map, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: contains non-finite values")
    if m.min() < 0 or m.max() > 1:
        raise ValueError(f"{name}: values outside [0, 1]")
    return m


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole model: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")


@dataclass(frozen=True)
class OrganizedCloud:
    """Per-pixel 3-D coordinates in the sensor frame.

    ``v`` is the horizontal coordinate (from image column), ``h`` the vertical
    coordinate (from image row), ``d`` the forward depth, all in meters.  The
    sensor sits at the origin looking along +d.  ``valid`` is False wherever
    the source depth was 0.
    """

    h: np.ndarray
    v: np.ndarray
    d: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        shapes = {self.h.shape, self.v.shape, self.d.shape, self.valid.shape}
        if len(shapes) != 1:
            raise ValueError(f"OrganizedCloud: mismatched field shapes {shapes}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.d.shape

    def points_xyz(self) -> np.ndarray:
        """All per-pixel points as an (H*W, 3) array of (v, h, d)."""
        return np.stack([self.v.ravel(), self.h.ravel(), self.d.ravel()], axis=1)

    def valid_points_xyz(self) -> np.ndarray:
        """Valid points only, as (N, 3) of (v, h, d)."""
        mask = self.valid.ravel()
        return self.points_xyz()[mask]


def depth_to_cloud(depth: np.ndarray, intrinsics: CameraIntrinsics) -> OrganizedCloud:
    """Back-project a depth map through the pinhole model.

    v = (x - cx) * d / fx and h = (y - cy) * d / fy for pixel (x, y) = (col, row).
    Pixels with d == 0 are flagged invalid; their coordinates are zero.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise ValueError("depth_to_cloud: depth must be 2-D")
    rows, cols = depth.shape
    xs = np.arange(cols, dtype=np.float64)[None, :]
    ys = np.arange(rows, dtype=np.float64)[:, None]
    v = (xs - intrinsics.cx) * depth / intrinsics.fx
    h = (ys - intrinsics.cy) * depth / intrinsics.fy
    valid = depth > 0
    return OrganizedCloud(h=h, v=v, d=depth.copy(), valid=valid)
