"""Bottom-up depth saliency from DCT patch dissimilarity.

The depth map is tiled into p x p patches; each patch is described by its
first T zig-zag DCT coefficients with the DC term excluded, so a constant
depth offset does not register.  A patch's saliency is its descriptor's
distance-weighted L1 dissimilarity to every other patch.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn
from scipy.spatial.distance import cdist

from .core import bilinear_resize, fill_zero_depth, minmax_normalize

DEFAULT_PATCH_SIZE = 8
DEFAULT_COEFF_COUNT = 9


def zigzag_indices(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays traversing a p x p block in zig-zag order."""
    order = sorted(
        ((r, c) for r in range(p) for c in range(p)),
        key=lambda rc: (rc[0] + rc[1], rc[1] if (rc[0] + rc[1]) % 2 == 0 else rc[0]),
    )
    rows, cols = zip(*order)
    return np.array(rows), np.array(cols)


def patch_descriptors(
    depth: np.ndarray, patch_size: int, coeff_count: int
) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    """DCT descriptors and pixel-space centers of all non-overlapping patches.

    The map is edge-padded up to a multiple of the patch size.  Returns
    (descriptors (N, T), centers (N, 2) as (row, col), patch grid shape).
    """
    h, w = depth.shape
    p = patch_size
    pad_h = (-h) % p
    pad_w = (-w) % p
    padded = np.pad(depth, ((0, pad_h), (0, pad_w)), mode="edge")
    nby, nbx = padded.shape[0] // p, padded.shape[1] // p
    blocks = padded.reshape(nby, p, nbx, p).transpose(0, 2, 1, 3).reshape(-1, p, p)
    coeffs = dctn(blocks, axes=(1, 2), norm="ortho")
    zr, zc = zigzag_indices(p)
    desc = coeffs[:, zr[1 : coeff_count + 1], zc[1 : coeff_count + 1]]
    by, bx = np.mgrid[0:nby, 0:nbx]
    centers = np.stack(
        [by.ravel() * p + (p - 1) / 2.0, bx.ravel() * p + (p - 1) / 2.0], axis=1
    )
    return desc, centers, (nby, nbx)


def dct_patch_saliency(
    depth: np.ndarray,
    patch_size: int = DEFAULT_PATCH_SIZE,
    coeff_count: int = DEFAULT_COEFF_COUNT,
    sigma_w: float | None = None,
) -> np.ndarray:
    """Distance-weighted patch dissimilarity, normalized and upsampled to pixels.

    Patch j scores sum(exp(-||c_j - c_l|| / sigma_w) * ||D_j - D_l||_1) over
    the other patches l.  ``sigma_w`` defaults to a quarter of the image
    diagonal.  Any remaining zero depths are replaced by the minimum positive
    depth first; an all-zero map is rejected.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise ValueError("dct_patch_saliency: depth must be 2-D")
    if coeff_count < 1 or coeff_count > patch_size * patch_size - 1:
        raise ValueError(
            f"dct_patch_saliency: coeff_count {coeff_count} outside 1..{patch_size**2 - 1}"
        )
    depth = fill_zero_depth(depth)
    h, w = depth.shape
    if sigma_w is None:
        sigma_w = 0.25 * float(np.hypot(h, w))
    desc, centers, grid_shape = patch_descriptors(depth, patch_size, coeff_count)
    weights = np.exp(-cdist(centers, centers) / sigma_w)
    dissim = cdist(desc, desc, metric="cityblock")
    patch_scores = (weights * dissim).sum(axis=1).reshape(grid_shape)
    return bilinear_resize(minmax_normalize(patch_scores), h, w)
