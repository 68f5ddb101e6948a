"""ROC/AUC benchmarking of saliency maps against binary ground truth."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_THRESHOLDS = 256


@dataclass(frozen=True)
class RocCurve:
    """Operating points ordered by increasing false-positive rate.

    Endpoints are always (0, 0) and (1, 1); both rates are non-decreasing
    along the curve.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-image AUC rows plus their arithmetic mean and timing."""

    per_image: tuple[tuple[str, float], ...]
    mean_auc: float
    skipped: tuple[tuple[str, str], ...]
    elapsed_s: float

    def to_csv(self, path: str | Path) -> None:
        lines = ["image_id,auc"]
        lines += [f"{image_id},{auc:.6f}" for image_id, auc in self.per_image]
        Path(path).write_text("\n".join(lines) + "\n")

    def summary_text(self) -> str:
        lines = [
            f"images evaluated : {len(self.per_image)}",
            f"images skipped   : {len(self.skipped)}",
            f"mean AUC         : {self.mean_auc:.4f}",
            f"elapsed          : {self.elapsed_s:.2f} s",
        ]
        for image_id, reason in self.skipped:
            lines.append(f"skipped {image_id}: {reason}")
        return "\n".join(lines)


def roc_auc(
    salmap: np.ndarray, gt_mask: np.ndarray, thresholds: int = DEFAULT_THRESHOLDS
) -> tuple[RocCurve, float]:
    """Threshold-sweep ROC curve and its trapezoidal area.

    Sweeps ``thresholds`` uniform levels over [0, 1] with the >= convention,
    appends the (0, 0) endpoint and integrates.  The ground truth must
    contain at least one positive and one negative pixel.
    """
    s = np.asarray(salmap, dtype=np.float64)
    gt = np.asarray(gt_mask).astype(bool)
    if s.shape != gt.shape:
        raise ValueError(f"roc_auc: map shape {s.shape} != mask shape {gt.shape}")
    pos = np.sort(s[gt])
    neg = np.sort(s[~gt])
    if pos.size == 0 or neg.size == 0:
        raise ValueError("roc_auc: ground truth has a single class; AUC undefined")
    ts = np.linspace(0.0, 1.0, thresholds)
    # count of values >= t via binary search over the sorted scores
    tpr = (pos.size - np.searchsorted(pos, ts, side="left")) / pos.size
    fpr = (neg.size - np.searchsorted(neg, ts, side="left")) / neg.size
    # threshold above the max closes the curve at (0, 0)
    ts = np.append(ts, np.inf)
    tpr = np.append(tpr, 0.0)
    fpr = np.append(fpr, 0.0)
    order = slice(None, None, -1)  # ascending FPR
    curve = RocCurve(thresholds=ts[order], fpr=fpr[order], tpr=tpr[order])
    auc = float(np.trapezoid(curve.tpr, curve.fpr))
    return curve, auc


def evaluate_dataset(
    entries: Iterable[tuple[str, np.ndarray, np.ndarray]],
    thresholds: int = DEFAULT_THRESHOLDS,
) -> BenchmarkReport:
    """Score a sequence of (image_id, saliency map, ground-truth mask) triples.

    Pairs that cannot be scored (extent mismatch, single-class ground truth)
    are reported in ``skipped`` and excluded from the mean instead of
    aborting the run.
    """
    t0 = time.perf_counter()
    rows: list[tuple[str, float]] = []
    skipped: list[tuple[str, str]] = []
    for image_id, salmap, mask in entries:
        try:
            _, auc = roc_auc(salmap, mask, thresholds=thresholds)
            rows.append((image_id, auc))
        except ValueError as exc:
            skipped.append((image_id, str(exc)))
    if not rows and not skipped:
        raise ValueError("evaluate_dataset: empty input")
    mean = float(np.mean([a for _, a in rows])) if rows else float("nan")
    return BenchmarkReport(
        per_image=tuple(rows),
        mean_auc=mean,
        skipped=tuple(skipped),
        elapsed_s=time.perf_counter() - t0,
    )
