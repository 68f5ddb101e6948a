"""3-D cues: adaptive center-bias weighting and surface-normal saliency.

Both operate on an organized cloud in the sensor frame.  The center bias
favors points near the optical axis and near the closest measured depth,
with a spread that adapts to the scene's depth range.  The normal cue scores
each pixel by how unusual its surface orientation is within the frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .core import OrganizedCloud, minmax_normalize

DEFAULT_ETA = 0.25
DEFAULT_CH = 0.5
DEFAULT_CV = 0.5
DEFAULT_PEAK_THRESHOLD = 0.8
DEFAULT_PEAK_RADIUS = 9
CONDITION_LIMIT = 1e8
MIN_VALID_NORMALS = 10


@dataclass(frozen=True)
class CenterBiasParams:
    """Scaling constants for the horizontal/vertical terms and the depth spread."""

    c_h: float = DEFAULT_CH
    c_v: float = DEFAULT_CV
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


def center_bias(
    cloud: OrganizedCloud,
    params: CenterBiasParams = CenterBiasParams(),
    literal: bool = False,
) -> np.ndarray:
    """Gaussian-style weight peaking at the axis at the nearest measured depth.

    W = exp(-(c_h*h^2 + c_v*v^2 + (d - d_min)) / (2*sigma^2)) with
    sigma = eta * max(d); output clipped to (0, 1].  Expects missing depths
    already replaced by the minimum positive depth.

    With ``literal=True`` the exponent is evaluated with a positive linear h
    term and linear v/depth terms instead (the asymmetric variant), for
    side-by-side comparison; the same clipping applies.
    """
    d = cloud.d
    valid = cloud.valid
    if not np.any(valid):
        raise ValueError("center_bias: cloud has no valid points")
    d_pos = d[d > 0]
    if d_pos.size == 0:
        raise ValueError("center_bias: no positive depths")
    d_min = d_pos.min()
    sigma = params.eta * d.max()
    two_sigma_sq = 2.0 * sigma * sigma
    if literal:
        arg = (params.c_h * cloud.h - params.c_v * cloud.v - (d - d_min)) / two_sigma_sq
    else:
        arg = -(params.c_h * cloud.h**2 + params.c_v * cloud.v**2 + (d - d_min)) / two_sigma_sq
    w = np.exp(arg)
    return np.clip(w, np.finfo(np.float64).tiny, 1.0)


@dataclass(frozen=True)
class NormalField:
    """Per-pixel unit surface normals; invalid where estimation failed."""

    normals: np.ndarray     # (H, W, 3)
    valid: np.ndarray       # (H, W) bool
    radius: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.valid.shape

    def valid_normals(self) -> np.ndarray:
        return self.normals[self.valid]


def estimate_normals(cloud: OrganizedCloud, radius: float) -> NormalField:
    """Plane-fit normals from all neighbors within ``radius`` of each point.

    The normal is the eigenvector of the neighborhood covariance with the
    smallest eigenvalue, oriented toward the sensor (n . p < 0).  Points with
    fewer than 3 in-radius neighbors (the point itself included) are flagged
    invalid.
    """
    if not radius > 0:
        raise ValueError(f"estimate_normals: radius must be positive, got {radius}")
    rows, cols = cloud.shape
    normals = np.zeros((rows, cols, 3), dtype=np.float64)
    valid_out = np.zeros((rows, cols), dtype=bool)
    pts = cloud.valid_points_xyz()
    if pts.shape[0] == 0:
        return NormalField(normals=normals, valid=valid_out, radius=radius)

    tree = cKDTree(pts)
    neighbor_lists = tree.query_ball_point(pts, r=radius, workers=-1)
    counts = np.fromiter((len(nb) for nb in neighbor_lists), dtype=np.intp, count=len(pts))
    enough = counts >= 3
    if np.any(enough):
        flat = np.concatenate([neighbor_lists[i] for i in np.flatnonzero(enough)])
        bounds = np.zeros(int(enough.sum()) + 1, dtype=np.intp)
        np.cumsum(counts[enough], out=bounds[1:])
        nb_pts = pts[flat]
        sums = np.add.reduceat(nb_pts, bounds[:-1], axis=0)
        outer = np.add.reduceat(
            (nb_pts[:, :, None] * nb_pts[:, None, :]).reshape(-1, 9), bounds[:-1], axis=0
        ).reshape(-1, 3, 3)
        n = counts[enough].astype(np.float64)[:, None]
        means = sums / n
        covs = outer / n[:, :, None] - means[:, :, None] * means[:, None, :]
        _, eigvecs = np.linalg.eigh(covs)
        nrm = eigvecs[:, :, 0]
        # orient toward the sensor at the origin
        flip = np.einsum("ij,ij->i", nrm, pts[enough]) > 0
        nrm[flip] *= -1.0
        norms = np.linalg.norm(nrm, axis=1, keepdims=True)
        nrm = nrm / np.where(norms > 0, norms, 1.0)

        pixel_rows, pixel_cols = np.nonzero(cloud.valid)
        sel_r = pixel_rows[enough]
        sel_c = pixel_cols[enough]
        normals[sel_r, sel_c] = nrm
        valid_out[sel_r, sel_c] = True
    return NormalField(normals=normals, valid=valid_out, radius=radius)


def normal_distribution_matrix(normals: np.ndarray) -> np.ndarray:
    """Second-moment matrix (1/N) * sum(n n^T) of a set of normal vectors."""
    normals = np.asarray(normals, dtype=np.float64)
    return normals.T @ normals / normals.shape[0]


def mahalanobis_scores(normals: np.ndarray, sigma: np.ndarray | None = None) -> np.ndarray:
    """Quadratic-form score n . Sigma^-1 . n per normal vector."""
    normals = np.asarray(normals, dtype=np.float64)
    if sigma is None:
        sigma = normal_distribution_matrix(normals)
    inv = np.linalg.inv(sigma)
    return np.einsum("ij,jk,ik->i", normals, inv, normals)


@dataclass(frozen=True)
class NormalSaliencyResult:
    salmap: np.ndarray
    degenerate: bool


def _disk_footprint(radius: int) -> np.ndarray:
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return yy * yy + xx * xx <= radius * radius


def normal_saliency(
    field: NormalField,
    peak_threshold: float = DEFAULT_PEAK_THRESHOLD,
    peak_radius: int = DEFAULT_PEAK_RADIUS,
) -> NormalSaliencyResult:
    """Rarity of each pixel's surface orientation, as a [0, 1] map.

    Scores are the quadratic form against the inverse of the normals'
    distribution matrix, scaled to [0, 1], median-filtered with a 5x5
    window, then boosted around strong peaks: every pixel within
    ``peak_radius`` of a pixel scoring above ``peak_threshold`` is raised to
    at least ``peak_threshold`` times that peak's value.  Invalid pixels are
    zero.  A (near-)singular distribution matrix - all normals parallel -
    yields an all-zero map flagged degenerate instead of an error.
    """
    valid = field.valid
    n_valid = int(valid.sum())
    if n_valid < MIN_VALID_NORMALS:
        raise ValueError(f"normal_saliency: only {n_valid} valid normals, need >= {MIN_VALID_NORMALS}")
    zero = np.zeros(field.shape, dtype=np.float64)
    vecs = field.valid_normals()
    sigma = normal_distribution_matrix(vecs)
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond >= CONDITION_LIMIT:
        return NormalSaliencyResult(salmap=zero, degenerate=True)
    scores = mahalanobis_scores(vecs, sigma)
    s2d = zero.copy()
    s2d[valid] = minmax_normalize(scores)
    s2d = ndimage.median_filter(s2d, size=5)
    peaks = np.where(s2d > peak_threshold, s2d, 0.0)
    if np.any(peaks > 0):
        nearby_peak = ndimage.maximum_filter(peaks, footprint=_disk_footprint(peak_radius))
        s2d = np.maximum(s2d, peak_threshold * nearby_peak)
    s2d[~valid] = 0.0
    return NormalSaliencyResult(salmap=s2d, degenerate=False)
