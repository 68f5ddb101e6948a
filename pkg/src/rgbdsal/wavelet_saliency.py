"""Bottom-up color saliency from multi-scale wavelet detail energy.

Each perceptual channel (luminance plus two opponent-color channels) is run
through a decimated Daubechies-4 wavelet cascade.  Per level, a full-
resolution feature map is rebuilt from the detail coefficients alone; the
squared sum over channels gives a local conspicuity map, and the rarity of
feature magnitudes (64-bin histogram likelihood) gives a global one.  The
normalized combination is the output.

The transform uses periodized boundaries so every level-k band has exactly
ceil(n / 2^k) samples per axis and integer translations by multiples of
2^levels commute with the transform away from the borders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import minmax_normalize

_SQRT3 = np.sqrt(3.0)
_NORM = 4.0 * np.sqrt(2.0)
# Daubechies-4 analysis pair (orthonormal)
_LO = np.array([(1 + _SQRT3), (3 + _SQRT3), (3 - _SQRT3), (1 - _SQRT3)]) / _NORM
_HI = np.array([_LO[3], -_LO[2], _LO[1], -_LO[0]])

DEFAULT_LEVELS = 4
HISTOGRAM_BINS = 64
# detail energy below this is rounding noise from constant regions, not signal
ENERGY_FLOOR = 1e-20


def _analyze_axis(x: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray, int]:
    """One analysis step along an axis; returns (lowpass, highpass, original length)."""
    n = x.shape[axis]
    if n % 2 == 1:
        edge = [(0, 0)] * x.ndim
        edge[axis] = (0, 1)
        x = np.pad(x, edge, mode="edge")
    lo = np.zeros_like(x)
    hi = np.zeros_like(x)
    for m in range(4):
        rolled = np.roll(x, -m, axis=axis)
        lo += _LO[m] * rolled
        hi += _HI[m] * rolled
    take = [slice(None)] * x.ndim
    take[axis] = slice(0, None, 2)
    return lo[tuple(take)], hi[tuple(take)], n


def _synthesize_axis(lo: np.ndarray, hi: np.ndarray, axis: int, out_len: int) -> np.ndarray:
    """Inverse of one analysis step along an axis (periodized, orthonormal)."""
    shape = list(lo.shape)
    shape[axis] = lo.shape[axis] * 2
    up_lo = np.zeros(shape, dtype=np.float64)
    up_hi = np.zeros(shape, dtype=np.float64)
    put = [slice(None)] * lo.ndim
    put[axis] = slice(0, None, 2)
    up_lo[tuple(put)] = lo
    up_hi[tuple(put)] = hi
    out = np.zeros(shape, dtype=np.float64)
    for m in range(4):
        out += _LO[m] * np.roll(up_lo, m, axis=axis) + _HI[m] * np.roll(up_hi, m, axis=axis)
    crop = [slice(None)] * lo.ndim
    crop[axis] = slice(0, out_len)
    return out[tuple(crop)]


def _analyze2d(x: np.ndarray) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray, np.ndarray], tuple[int, int]]:
    lo_r, hi_r, rows = _analyze_axis(x, axis=0)
    ll, lh, cols = _analyze_axis(lo_r, axis=1)
    hl, hh, _ = _analyze_axis(hi_r, axis=1)
    return ll, (lh, hl, hh), (rows, cols)


def _synthesize2d(
    ll: np.ndarray,
    details: tuple[np.ndarray, np.ndarray, np.ndarray],
    shape: tuple[int, int],
) -> np.ndarray:
    lh, hl, hh = details
    rows, cols = shape
    lo_r = _synthesize_axis(ll, lh, axis=1, out_len=cols)
    hi_r = _synthesize_axis(hl, hh, axis=1, out_len=cols)
    return _synthesize_axis(lo_r, hi_r, axis=0, out_len=rows)


@dataclass(frozen=True)
class WaveletPyramid:
    """Decimated detail bands per level plus the final approximation."""

    details: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]
    approx: np.ndarray
    shapes: tuple[tuple[int, int], ...]  # input extents entering each level

    @property
    def levels(self) -> int:
        return len(self.details)


def wavelet_pyramid(channel: np.ndarray, levels: int) -> WaveletPyramid:
    x = np.asarray(channel, dtype=np.float64)
    details = []
    shapes = []
    for _ in range(levels):
        shapes.append(x.shape)
        x, bands, _ = _analyze2d(x)
        details.append(bands)
    return WaveletPyramid(details=tuple(details), approx=x, shapes=tuple(shapes))


def detail_reconstruction(pyr: WaveletPyramid, level: int) -> np.ndarray:
    """Full-resolution image rebuilt from the details of one level only."""
    lh, hl, hh = pyr.details[level]
    x = _synthesize2d(np.zeros_like(lh), (lh, hl, hh), pyr.shapes[level])
    for k in range(level - 1, -1, -1):
        z = np.zeros_like(x)
        x = _synthesize2d(x, (z, z, z), pyr.shapes[k])
    return x


def _opponent_channels(img: np.ndarray) -> list[np.ndarray]:
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return [(r + g + b) / 3.0, r - g, b - (r + g) / 2.0]


def wt_saliency(img: np.ndarray, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Bottom-up saliency of an RGB image from wavelet detail energy.

    Requires 2**levels <= min(H, W).  Output is min-max scaled to [0, 1];
    an image with no detail at all (uniform color) maps to all zeros.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"wt_saliency: expected (H, W, 3) image, got {img.shape}")
    h, w = img.shape[:2]
    if levels < 1:
        raise ValueError("wt_saliency: levels must be >= 1")
    if 2**levels > min(h, w):
        raise ValueError(
            f"wt_saliency: image {h}x{w} smaller than 2^levels = {2**levels} in one extent"
        )
    # symmetric pre-extension keeps the periodized transform's wrap seam out of
    # reach of the cropped window (cascade support ~ (filter_len-1) * 2^levels)
    margin = (len(_LO) - 1) * 2**levels
    energies = [np.zeros((h, w), dtype=np.float64) for _ in range(levels)]
    for channel in _opponent_channels(img):
        padded = np.pad(channel, margin, mode="symmetric")
        pyr = wavelet_pyramid(padded, levels)
        for k in range(levels):
            recon = detail_reconstruction(pyr, k)[margin : margin + h, margin : margin + w]
            energies[k] += recon * recon
    local = np.zeros((h, w), dtype=np.float64)
    rarity = np.zeros((h, w), dtype=np.float64)
    n_pix = h * w
    for energy in energies:
        energy[energy < ENERGY_FLOOR] = 0.0
        local += energy
        mag = np.sqrt(energy)
        top = mag.max()
        if top <= 0:
            continue
        bins = np.minimum((mag / top * HISTOGRAM_BINS).astype(np.intp), HISTOGRAM_BINS - 1)
        counts = np.bincount(bins.ravel(), minlength=HISTOGRAM_BINS)
        rarity += -np.log(counts[bins] / n_pix)
    return minmax_normalize(minmax_normalize(local) + minmax_normalize(rarity))
