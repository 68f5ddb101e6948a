"""Top-down color saliency pooled from externally produced network outputs.

Two input families:
  * per-class score maps from a segmentation net (objectness), optionally
    with a background score map (non-objectness);
  * per-layer guided-backprop gradient magnitude tensors from a
    classification backbone.

The pooling here turns either family into a single [0, 1] saliency map.
Producing the score maps / gradients themselves is an external concern; they
arrive through the tensor file format plus a small text manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .core import bilinear_resize, minmax_normalize, power_keep_zero
from .tensor_io import read_tensor, write_tensor

SIGMA_GUARD = 1e-12
DEFAULT_GBP_SCALE = 3.0
DEFAULT_GBP_LAYERS = (3, 4, 5)


@dataclass(frozen=True)
class ScoreMapStack:
    """C per-class score grids plus an optional background grid.

    Scores are unbounded reals (pre-softmax).  Per-class mean and standard
    deviation are computed once and cached; the standard deviation is the
    population one.
    """

    scores: np.ndarray                      # (C, H, W)
    background: np.ndarray | None = None    # (H, W)
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", scores)
        if scores.ndim != 3 or scores.shape[0] < 1:
            raise ValueError(f"ScoreMapStack: scores must be (C, H, W) with C >= 1, got {scores.shape}")
        if not np.all(np.isfinite(scores)):
            raise ValueError("ScoreMapStack: non-finite score values")
        if self.background is not None:
            bg = np.asarray(self.background, dtype=np.float64)
            object.__setattr__(self, "background", bg)
            if bg.shape != scores.shape[1:]:
                raise ValueError(
                    f"ScoreMapStack: background shape {bg.shape} != class grid shape {scores.shape[1:]}"
                )
            if not np.all(np.isfinite(bg)):
                raise ValueError("ScoreMapStack: non-finite background values")
        if self.class_names and len(self.class_names) != scores.shape[0]:
            raise ValueError("ScoreMapStack: class_names length != C")

    @property
    def num_classes(self) -> int:
        return self.scores.shape[0]

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.scores.shape[1:]

    @cached_property
    def class_means(self) -> np.ndarray:
        return self.scores.mean(axis=(1, 2))

    @cached_property
    def class_stds(self) -> np.ndarray:
        return self.scores.std(axis=(1, 2))


@dataclass(frozen=True)
class GradientStack:
    """Guided-backprop gradient magnitudes per (layer, class).

    ``tensors[(layer, class_index)]`` is a (K, H_i, W_i) array of non-negative
    gradient magnitudes; class indices follow ``class_labels``, which is
    ordered by descending classifier score (top-k first).  ``frame_shape`` is
    the RGB frame resolution the maps get upsampled to.
    """

    layers: tuple[int, ...]
    class_labels: tuple[str, ...]
    frame_shape: tuple[int, int]
    tensors: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("GradientStack: empty layer list")
        for key, t in self.tensors.items():
            t = np.asarray(t, dtype=np.float64)
            if t.ndim != 3 or t.shape[0] < 1:
                raise ValueError(f"GradientStack: tensor {key} must be (K, H, W), got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"GradientStack: non-finite values in tensor {key}")

    @property
    def num_classes(self) -> int:
        return len(self.class_labels)

    def tensor(self, layer: int, class_index: int) -> np.ndarray:
        key = (layer, class_index)
        if key not in self.tensors:
            raise KeyError(f"GradientStack: no tensor for layer {layer}, class {class_index}")
        return np.asarray(self.tensors[key], dtype=np.float64)


def objectness_lambda(stack: ScoreMapStack) -> np.ndarray:
    """Amplification exponent: sqrt of the normalized max squared z-score.

    Per class, scores are standardized with the class's own mean/std; a class
    whose std falls below the guard contributes an all-zero z-map (a uniform
    score map says nothing).  The pixelwise max over classes is min-max
    normalized and square-rooted.
    """
    mu = stack.class_means
    sigma = stack.class_stds
    z2 = np.zeros_like(stack.scores)
    ok = sigma >= SIGMA_GUARD
    if np.any(ok):
        z = (stack.scores[ok] - mu[ok, None, None]) / sigma[ok, None, None]
        z2[ok] = z * z
    return np.sqrt(minmax_normalize(z2.max(axis=0)))


def objectness_saliency(stack: ScoreMapStack) -> np.ndarray:
    """Mean of the class score maps, normalized, amplified by the lambda exponent.

    0 ** 0 is taken as 0 so zero-scoring pixels stay suppressed even where
    the exponent map vanishes.
    """
    base = minmax_normalize(stack.scores.mean(axis=0))
    lam = objectness_lambda(stack)
    return power_keep_zero(base, lam)


def nonobjectness_saliency(stack: ScoreMapStack) -> np.ndarray:
    """Negated background likelihood scaled to [0, 1]."""
    if stack.background is None:
        raise ValueError("nonobjectness_saliency: stack has no background grid")
    return minmax_normalize(-stack.background)


def gbp_upsample_max(
    stack: GradientStack, layer: int, class_index: int, out_h: int, out_w: int
) -> np.ndarray:
    """Upsample each gradient channel bilinearly, then take the pixelwise max.

    Only upsampling is supported: a target smaller than the source tensor in
    either extent is rejected.
    """
    t = stack.tensor(layer, class_index)
    _, src_h, src_w = t.shape
    if out_h < src_h or out_w < src_w:
        raise ValueError(
            f"gbp_upsample_max: target {out_h}x{out_w} smaller than source {src_h}x{src_w}"
        )
    out = bilinear_resize(t[0], out_h, out_w)
    for k in range(1, t.shape[0]):
        np.maximum(out, bilinear_resize(t[k], out_h, out_w), out=out)
    return out


def gbp_class_map(
    stack: GradientStack, class_index: int, scale: float = DEFAULT_GBP_SCALE
) -> np.ndarray:
    """Average of tanh(scale * m) over the stack's layers at frame resolution."""
    if not stack.layers:
        raise ValueError("gbp_class_map: empty layer list")
    out_h, out_w = stack.frame_shape
    acc = np.zeros((out_h, out_w), dtype=np.float64)
    for layer in stack.layers:
        m = gbp_upsample_max(stack, layer, class_index, out_h, out_w)
        acc += np.tanh(scale * m)
    return acc / len(stack.layers)


def gbp_saliency(
    stack: GradientStack, top_k: int = 3, scale: float = DEFAULT_GBP_SCALE
) -> np.ndarray:
    """Average of the top-k class maps, min-max normalized."""
    if top_k < 1:
        raise ValueError("gbp_saliency: top_k must be >= 1")
    if top_k > stack.num_classes:
        raise ValueError(
            f"gbp_saliency: top_k={top_k} but stack holds {stack.num_classes} classes"
        )
    acc = np.zeros(stack.frame_shape, dtype=np.float64)
    for c in range(top_k):
        acc += gbp_class_map(stack, c, scale)
    return minmax_normalize(acc / top_k)


# ---------------------------------------------------------------------------
# File transport: tensor files + line-based text manifests
# ---------------------------------------------------------------------------

def save_score_stack(stack: ScoreMapStack, out_dir: str | Path, name: str) -> Path:
    """Write a score stack as one [C(+1), H, W] tensor plus a manifest.

    The background slice, when present, goes last.  Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    slices = [stack.scores]
    if stack.background is not None:
        slices.append(stack.background[None])
    tensor_name = f"{name}.smt"
    write_tensor(np.concatenate(slices, axis=0), out_dir / tensor_name)
    lines = [f"tensor {tensor_name}"]
    names = stack.class_names or tuple(f"class_{c}" for c in range(stack.num_classes))
    for c, cname in enumerate(names):
        lines.append(f"class {c} {cname}")
    if stack.background is not None:
        lines.append(f"background {stack.num_classes}")
    manifest = out_dir / f"{name}.manifest"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_score_stack(manifest_path: str | Path) -> ScoreMapStack:
    """Load a score stack from its manifest; the tensor path is resolved relative to it."""
    manifest_path = Path(manifest_path)
    tensor_name = None
    class_names: dict[int, str] = {}
    background_slice = None
    for lineno, line in enumerate(manifest_path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "tensor" and len(parts) == 2:
            tensor_name = parts[1]
        elif parts[0] == "class" and len(parts) >= 3:
            class_names[int(parts[1])] = " ".join(parts[2:])
        elif parts[0] == "background" and len(parts) == 2:
            background_slice = int(parts[1])
        else:
            raise ValueError(f"{manifest_path}:{lineno}: unrecognized manifest line {line!r}")
    if tensor_name is None:
        raise ValueError(f"{manifest_path}: missing 'tensor' entry")
    data = read_tensor(manifest_path.parent / tensor_name).astype(np.float64)
    if data.ndim != 3:
        raise ValueError(f"{manifest_path}: score tensor must be 3-D, got {data.shape}")
    if background_slice is not None:
        if not (0 <= background_slice < data.shape[0]):
            raise ValueError(f"{manifest_path}: background slice {background_slice} out of range")
        background = data[background_slice]
        scores = np.delete(data, background_slice, axis=0)
    else:
        background = None
        scores = data
    names = tuple(class_names.get(c, f"class_{c}") for c in range(scores.shape[0]))
    return ScoreMapStack(scores=scores, background=background, class_names=names)


def save_gradient_stack(stack: GradientStack, out_dir: str | Path) -> Path:
    """Write per-(layer, class) tensors plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"frame {stack.frame_shape[0]} {stack.frame_shape[1]}",
        "layers " + " ".join(str(i) for i in stack.layers),
    ]
    for c, label in enumerate(stack.class_labels):
        lines.append(f"class {c} {label}")
    for (layer, c), t in sorted(stack.tensors.items()):
        fname = f"gbp_l{layer}_c{c}.smt"
        write_tensor(np.asarray(t), out_dir / fname)
        lines.append(f"tensor {layer} {c} {fname}")
    manifest = out_dir / "gradients.manifest"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_gradient_stack(manifest_path: str | Path) -> GradientStack:
    manifest_path = Path(manifest_path)
    layers: tuple[int, ...] = ()
    frame_shape = None
    class_labels: dict[int, str] = {}
    tensors: dict[tuple[int, int], np.ndarray] = {}
    for lineno, line in enumerate(manifest_path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "frame" and len(parts) == 3:
            frame_shape = (int(parts[1]), int(parts[2]))
        elif parts[0] == "layers":
            layers = tuple(int(p) for p in parts[1:])
        elif parts[0] == "class" and len(parts) >= 3:
            class_labels[int(parts[1])] = " ".join(parts[2:])
        elif parts[0] == "tensor" and len(parts) == 4:
            key = (int(parts[1]), int(parts[2]))
            tensors[key] = read_tensor(manifest_path.parent / parts[3]).astype(np.float64)
        else:
            raise ValueError(f"{manifest_path}:{lineno}: unrecognized manifest line {line!r}")
    if frame_shape is None:
        raise ValueError(f"{manifest_path}: missing 'frame' entry")
    labels = tuple(class_labels[c] for c in sorted(class_labels))
    return GradientStack(
        layers=layers, class_labels=labels, frame_shape=frame_shape, tensors=tensors
    )
