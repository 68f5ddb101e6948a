"""PNG image transport: 8-bit RGB frames, 16-bit depth, grayscale maps."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

DEFAULT_DEPTH_SCALE = 0.001  # meters per 16-bit unit (millimeter convention)
GT_BINARIZE_AT = 127


def load_rgb(path: str | Path) -> np.ndarray:
    """Load an 8-bit RGB image as (H, W, 3) uint8."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_rgb(img: np.ndarray, path: str | Path) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="RGB").save(path)


def load_depth(path: str | Path, scale: float = DEFAULT_DEPTH_SCALE) -> np.ndarray:
    """Load a 16-bit grayscale depth PNG and convert to meters."""
    with Image.open(path) as im:
        raw = np.asarray(im)
    if raw.ndim != 2:
        raise ValueError(f"{path}: depth image must be single channel, got shape {raw.shape}")
    return raw.astype(np.float64) * scale


def save_depth(depth_m: np.ndarray, path: str | Path, scale: float = DEFAULT_DEPTH_SCALE) -> None:
    """Write a depth map in meters as a 16-bit grayscale PNG."""
    units = np.round(np.asarray(depth_m, dtype=np.float64) / scale)
    units = np.clip(units, 0, np.iinfo(np.uint16).max).astype(np.uint16)
    Image.fromarray(units).save(path)


def load_mask(path: str | Path) -> np.ndarray:
    """Load a ground-truth mask, binarized above 127."""
    with Image.open(path) as im:
        gray = np.asarray(im.convert("L"))
    return gray > GT_BINARIZE_AT


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def quantize_salmap(salmap: np.ndarray) -> np.ndarray:
    """Quantize a [0, 1] map to 8-bit gray."""
    return np.round(np.clip(salmap, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_salmap_png(salmap: np.ndarray, path: str | Path) -> None:
    Image.fromarray(quantize_salmap(salmap), mode="L").save(path)


def load_salmap_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0


def _heat_colormap(values: np.ndarray) -> np.ndarray:
    """Black-blue-magenta-yellow-white ramp for quick visual inspection."""
    v = np.clip(values, 0.0, 1.0)
    r = np.clip(3.0 * v - 1.0, 0.0, 1.0)
    g = np.clip(3.0 * v - 2.0, 0.0, 1.0)
    b = np.clip(np.where(v < 1 / 3, 3.0 * v, 1.5 - 1.5 * v), 0.0, 1.0)
    return np.round(np.stack([r, g, b], axis=-1) * 255.0).astype(np.uint8)


def save_salmap_color_png(salmap: np.ndarray, path: str | Path) -> None:
    Image.fromarray(_heat_colormap(salmap), mode="RGB").save(path)
