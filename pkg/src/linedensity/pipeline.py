"""Batch jobs behind the CLI: map generation, evaluation, dedup.

Generation runs one task per image in a worker pool; every image's map
depends only on its own annotation, so output files are bit-identical
regardless of the parallelism degree.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .annotations import AnnotationError, AnnotationSet, load_annotations
from .dedup import (
    DEFAULT_THRESHOLD,
    DropEvent,
    FeatureStack,
    builtin_feature_pyramid,
    deduplicate,
    load_stack,
)
from .density import DensityMap, count_from_density, density_map, load_dmap, save_dmap, save_pgm
from .evaluation import EvalRecord, EvalReport, evaluate_dataset, records_from_maps, write_records_csv
from .kernels import KernelConfig

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

MaskRect = tuple[int, int, int, int]  # x, y, w, h


class JobError(RuntimeError):
    """A batch job failed; ``errors`` lists one message per problem."""

    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True, slots=True)
class JobConfig:
    """Everything a generation run needs."""

    annotation_paths: tuple[Path, ...]
    out_dir: Path
    scheme: str = "agk"
    kernel: KernelConfig = field(default_factory=KernelConfig)
    image_dir: Path | None = None
    masks: tuple[MaskRect, ...] = ()
    jobs: int = 1
    write_figures: bool = False
    write_pgm: bool = False


@dataclass(frozen=True, slots=True)
class GenerateItem:
    image_id: str
    n_labels: int
    count: float
    dmap_path: Path


@dataclass(frozen=True, slots=True)
class GenerateSummary:
    items: list[GenerateItem]
    wall_time_s: float
    masked_images: list[Path]


def load_annotation_paths(paths: Sequence[Path]) -> list[AnnotationSet]:
    """Parse every file, reporting all failures at once."""
    sets: list[AnnotationSet] = []
    errors: list[str] = []
    seen: set[str] = set()
    for path in paths:
        try:
            for ann in load_annotations(path):
                if ann.image_id in seen:
                    errors.append(f"{path}: duplicate image id {ann.image_id!r}")
                    continue
                seen.add(ann.image_id)
                sets.append(ann)
        except (AnnotationError, OSError) as exc:
            errors.append(str(exc))
    if errors:
        raise JobError(errors)
    return sets


def _generate_one(ann: AnnotationSet, job: JobConfig) -> GenerateItem:
    dmap = density_map(ann, job.kernel, job.scheme)
    dmap_path = job.out_dir / f"{ann.image_id}.dmap"
    save_dmap(dmap_path, dmap)
    if job.write_pgm:
        save_pgm(job.out_dir / f"{ann.image_id}.pgm", dmap)
    if job.write_figures:
        from .figures import render_density_figure

        render_density_figure(
            dmap, job.out_dir / f"{ann.image_id}.png",
            title=f"{ann.image_id} ({job.scheme})",
        )
    return GenerateItem(
        image_id=ann.image_id,
        n_labels=ann.count,
        count=count_from_density(dmap),
        dmap_path=dmap_path,
    )


def apply_mask(image_path: Path, out_path: Path, masks: Sequence[MaskRect]) -> None:
    """Fill the given rectangles with solid black and write a copy."""
    with Image.open(image_path) as img:
        arr = np.array(img)
        for x, y, w, h in masks:
            arr[max(y, 0) : y + h, max(x, 0) : x + w] = 0
        Image.fromarray(arr).save(out_path)


def _find_image(image_dir: Path, image_id: str) -> Path | None:
    for ext in IMAGE_EXTENSIONS:
        candidate = image_dir / f"{image_id}{ext}"
        if candidate.exists():
            return candidate
    return None


def run_generate(job: JobConfig) -> GenerateSummary:
    """Write one DMAP file per annotated image using the selected scheme."""
    start = time.perf_counter()
    annotations = load_annotation_paths(job.annotation_paths)
    job.out_dir.mkdir(parents=True, exist_ok=True)

    if job.jobs > 1:
        with ThreadPoolExecutor(max_workers=job.jobs) as pool:
            items = list(pool.map(lambda ann: _generate_one(ann, job), annotations))
    else:
        items = [_generate_one(ann, job) for ann in annotations]

    masked: list[Path] = []
    if job.masks:
        if job.image_dir is None:
            raise JobError(["--mask requires an image directory"])
        masked_dir = job.out_dir / "images"
        masked_dir.mkdir(exist_ok=True)
        for ann in annotations:
            src = _find_image(job.image_dir, ann.image_id)
            if src is None:
                log.warning("no image file for %r in %s; mask skipped", ann.image_id, job.image_dir)
                continue
            dst = masked_dir / src.name
            apply_mask(src, dst, job.masks)
            masked.append(dst)

    _write_counts_csv(job.out_dir / "counts.csv", items)
    return GenerateSummary(
        items=items,
        wall_time_s=time.perf_counter() - start,
        masked_images=masked,
    )


def _write_counts_csv(path: Path, items: Sequence[GenerateItem]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "n_labels", "count"])
        for item in items:
            writer.writerow([item.image_id, item.n_labels, item.count])


def load_dmap_dir(directory: Path) -> dict[str, DensityMap]:
    """All *.dmap files in a directory, keyed by file stem."""
    return {p.stem: load_dmap(p) for p in sorted(directory.glob("*.dmap"))}


def run_eval(
    gt_dir: Path,
    pred_dir: Path,
    out_dir: Path,
    figures: bool = True,
) -> tuple[EvalReport, list[EvalRecord]]:
    """Score a prediction directory against ground truth and write the report.

    Outputs: report.json, records.csv, and (optionally) figures, all in
    ``out_dir``. Raises JobError when ids do not match up.
    """
    gt_maps = load_dmap_dir(gt_dir)
    pred_maps = load_dmap_dir(pred_dir)
    try:
        records = records_from_maps(gt_maps, pred_maps)
        report = evaluate_dataset(gt_maps, pred_maps)
    except ValueError as exc:
        raise JobError([str(exc)]) from exc

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    write_records_csv(out_dir / "records.csv", records)
    if figures:
        from .figures import render_eval_figures

        render_eval_figures(report, records, out_dir)
    return report, records


def load_feature_dir(features_dir: Path) -> list[FeatureStack]:
    """All *.fst5 stacks in name order (the dedup scan order)."""
    return [load_stack(p) for p in sorted(features_dir.glob("*.fst5"))]


def pyramids_from_image_dir(image_dir: Path) -> list[FeatureStack]:
    """Built-in pyramid stacks for every image in a directory, name order."""
    stacks = []
    for path in sorted(image_dir.iterdir()):
        if path.suffix.lower() in IMAGE_EXTENSIONS:
            with Image.open(path) as img:
                stacks.append(builtin_feature_pyramid(np.array(img), image_id=path.stem))
    return stacks


def run_dedup(
    stacks: Sequence[FeatureStack],
    threshold: float = DEFAULT_THRESHOLD,
    report_path: Path | None = None,
) -> tuple[list[str], list[DropEvent]]:
    """Deduplicate stacks and optionally write a JSON audit report."""
    kept, dropped = deduplicate(list(stacks), threshold=threshold)
    if report_path is not None:
        report = {
            "threshold": threshold,
            "n_input": len(stacks),
            "kept": kept,
            "dropped": [
                {"dropped": ev.dropped_id, "kept": ev.kept_id, "distance": ev.distance}
                for ev in dropped
            ],
        }
        report_path.write_text(json.dumps(report, indent=2) + "\n")
    return kept, dropped
