"""Integration cascade combining the individual saliency cues.

Three stages: a convex top-down/bottom-up color mix, a depth/center-bias/
normal-weighted RGB-D map, and a final sum with the space-based cue.  Every
stage returns a map in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import minmax_normalize, power_keep_zero

DEFAULT_ALPHA = 0.7
DEFAULT_EXPONENT_FLOOR = 0.05


@dataclass(frozen=True)
class FusionParams:
    """Global mixing weight shared by the color and RGB-D stages."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


def _check_extents(*maps: np.ndarray):
    shapes = {m.shape for m in maps}
    if len(shapes) != 1:
        raise ValueError(f"fusion: mismatched map extents {sorted(shapes)}")


def fuse_rgb(td: np.ndarray, bu: np.ndarray, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """Convex combination of top-down and bottom-up color saliency."""
    td = np.asarray(td, dtype=np.float64)
    bu = np.asarray(bu, dtype=np.float64)
    _check_extents(td, bu)
    return alpha * td + (1.0 - alpha) * bu


def fuse_rgbd(
    s_rgb: np.ndarray,
    s_d: np.ndarray,
    w_cb: np.ndarray,
    s_n: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    exponent_floor: float = DEFAULT_EXPONENT_FLOOR,
) -> np.ndarray:
    """Center-bias weighted color/depth mix raised to the normal-saliency exponent.

    The per-pixel exponent is floored at ``exponent_floor``: an exponent near
    0 would drive every positive pixel toward 1 and flatten the map.  Setting
    the floor to 0 evaluates the unmodified power law.  0 ** 0 is 0.
    """
    s_rgb = np.asarray(s_rgb, dtype=np.float64)
    s_d = np.asarray(s_d, dtype=np.float64)
    w_cb = np.asarray(w_cb, dtype=np.float64)
    s_n = np.asarray(s_n, dtype=np.float64)
    _check_extents(s_rgb, s_d, w_cb, s_n)
    base = minmax_normalize((alpha * s_rgb + (1.0 - alpha) * s_d) * w_cb)
    exponent = np.maximum(s_n, exponent_floor)
    return power_keep_zero(base, exponent)


def fuse_final(s_rgbd: np.ndarray, s_sbs: np.ndarray) -> np.ndarray:
    """Sum of the RGB-D and space-based maps, min-max normalized."""
    s_rgbd = np.asarray(s_rgbd, dtype=np.float64)
    s_sbs = np.asarray(s_sbs, dtype=np.float64)
    _check_extents(s_rgbd, s_sbs)
    return minmax_normalize(s_rgbd + s_sbs)
