"""Counting metrics: MAE, RMSE, pixelwise MSE, density-level strata.

Counts are compared fractionally; rounding is a presentation concern.
Images are stratified by their ground-truth count into low (< 5),
medium (5 to 19) and high (>= 20) density levels.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

from .density import DensityMap, count_from_density

CountPair = tuple[float, float]  # (ground truth, prediction)


class DensityLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


def density_level(count: float) -> DensityLevel:
    """Stratum for a ground-truth count: low < 5 <= medium < 20 <= high."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if count < 5:
        return DensityLevel.LOW
    if count < 20:
        return DensityLevel.MEDIUM
    return DensityLevel.HIGH


def mae(pairs: Sequence[CountPair]) -> float:
    """Mean absolute count error over (gt, pred) pairs."""
    if not pairs:
        raise ValueError("no records")
    return sum(abs(gt - pred) for gt, pred in pairs) / len(pairs)


def rmse(pairs: Sequence[CountPair]) -> float:
    """Root mean square count error over (gt, pred) pairs."""
    if not pairs:
        raise ValueError("no records")
    return math.sqrt(sum((gt - pred) ** 2 for gt, pred in pairs) / len(pairs))


class PixelMse(NamedTuple):
    """Squared pixel distance between two maps, raw and per pixel."""

    raw: float
    per_pixel: float


def pixel_mse(gt: DensityMap, pred: DensityMap) -> PixelMse:
    """Squared Euclidean distance between two equally sized maps."""
    if (gt.width, gt.height) != (pred.width, pred.height):
        raise ValueError(
            f"dimension mismatch: {gt.width}x{gt.height} vs {pred.width}x{pred.height}"
        )
    diff = gt.values - pred.values
    raw = float((diff * diff).sum())
    return PixelMse(raw=raw, per_pixel=raw / gt.values.size)


@dataclass(frozen=True, slots=True)
class EvalRecord:
    """Per-image evaluation row."""

    image_id: str
    gt_count: float
    pred_count: float

    @property
    def level(self) -> DensityLevel:
        return density_level(self.gt_count)

    @property
    def abs_error(self) -> float:
        return abs(self.gt_count - self.pred_count)


@dataclass(frozen=True, slots=True)
class StratumStats:
    """MAE/RMSE over one stratum; metrics absent when the stratum is empty."""

    n_images: int
    mae: float | None = None
    rmse: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"n": self.n_images}
        if self.n_images:
            out["mae"] = self.mae
            out["rmse"] = self.rmse
        return out


@dataclass(frozen=True, slots=True)
class EvalReport:
    overall: StratumStats
    levels: dict[DensityLevel, StratumStats]
    mean_pixel_mse: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"overall": self.overall.to_dict()}
        for level in DensityLevel:
            out[level.value] = self.levels[level].to_dict()
        if self.mean_pixel_mse is not None:
            out["mean_pixel_mse"] = self.mean_pixel_mse
        return out


def _stats(pairs: Sequence[CountPair]) -> StratumStats:
    if not pairs:
        return StratumStats(n_images=0)
    return StratumStats(n_images=len(pairs), mae=mae(pairs), rmse=rmse(pairs))


def records_from_maps(
    gt_maps: Mapping[str, DensityMap], pred_maps: Mapping[str, DensityMap]
) -> list[EvalRecord]:
    """Count both sides of an id-matched map collection."""
    missing_gt = sorted(set(pred_maps) - set(gt_maps))
    missing_pred = sorted(set(gt_maps) - set(pred_maps))
    if missing_gt or missing_pred:
        parts = []
        if missing_gt:
            parts.append(f"missing ground truth for: {', '.join(missing_gt)}")
        if missing_pred:
            parts.append(f"missing predictions for: {', '.join(missing_pred)}")
        raise ValueError("; ".join(parts))
    return [
        EvalRecord(
            image_id=image_id,
            gt_count=count_from_density(gt_maps[image_id]),
            pred_count=count_from_density(pred_maps[image_id]),
        )
        for image_id in sorted(gt_maps)
    ]


def summarize(records: Sequence[EvalRecord], mean_pixel_mse: float | None = None) -> EvalReport:
    """Aggregate records into per-level and overall MAE/RMSE."""
    by_level: dict[DensityLevel, list[CountPair]] = {level: [] for level in DensityLevel}
    for rec in records:
        by_level[rec.level].append((rec.gt_count, rec.pred_count))
    all_pairs = [(rec.gt_count, rec.pred_count) for rec in records]
    return EvalReport(
        overall=_stats(all_pairs),
        levels={level: _stats(pairs) for level, pairs in by_level.items()},
        mean_pixel_mse=mean_pixel_mse,
    )


def evaluate_dataset(
    gt_maps: Mapping[str, DensityMap], pred_maps: Mapping[str, DensityMap]
) -> EvalReport:
    """Score predicted maps against ground truth by image id.

    Counts come from integrating each map; strata follow the ground-truth
    level. The mean pixel MSE is the mean over images of the raw squared
    pixel distance, mirroring the training loss this pipeline feeds.
    """
    records = records_from_maps(gt_maps, pred_maps)
    if records:
        mean_raw = sum(
            pixel_mse(gt_maps[r.image_id], pred_maps[r.image_id]).raw for r in records
        ) / len(records)
    else:
        mean_raw = None
    return summarize(records, mean_pixel_mse=mean_raw)


def write_records_csv(path: str | Path, records: Sequence[EvalRecord]) -> None:
    """Per-image CSV: image_id, gt_count, pred_count, level, abs_error."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "gt_count", "pred_count", "level", "abs_error"])
        for rec in records:
            writer.writerow(
                [rec.image_id, rec.gt_count, rec.pred_count, rec.level.value, rec.abs_error]
            )
