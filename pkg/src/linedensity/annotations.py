"""Line-segment annotation data model and geometry.

Each annotated object is a straight segment drawn through the object's
long axis. The segment's midpoint doubles as the object's dot label, and
evenly spaced points along the segment drive per-point kernel placement.
Coordinates are pixels, origin top-left, x rightward, y downward;
sub-pixel values are allowed.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

log = logging.getLogger(__name__)


class AnnotationError(ValueError):
    """Raised when an annotation document fails validation."""


@dataclass(frozen=True, slots=True)
class Point2:
    """A 2-D pixel location (possibly fractional)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise AnnotationError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class LineLabel:
    """One annotated object: a segment between two endpoints.

    Endpoint order carries no meaning; the label is undirected.
    """

    a: Point2
    b: Point2

    @property
    def is_degenerate(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True, slots=True)
class AnnotationSet:
    """An image's dimensions plus its line labels.

    The ground-truth count of the image is ``len(labels)``.
    """

    image_id: str
    width: int
    height: int
    labels: tuple[LineLabel, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise AnnotationError(
                f"{self.image_id!r}: image dimensions must be positive, "
                f"got {self.width}x{self.height}"
            )
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def count(self) -> int:
        return len(self.labels)


def midpoint(line: LineLabel) -> Point2:
    """Segment midpoint; used as the object's dot label."""
    return Point2((line.a.x + line.b.x) / 2.0, (line.a.y + line.b.y) / 2.0)


def line_length(line: LineLabel) -> float:
    """Euclidean distance between the endpoints."""
    return math.hypot(line.b.x - line.a.x, line.b.y - line.a.y)


def n_sample_points(line: LineLabel) -> int:
    """Number of evenly spaced points used to represent the segment.

    ceil(max(|dx|, |dy|)) + 1, so consecutive points are at most one
    pixel apart along the dominant axis. A degenerate segment yields one
    point.
    """
    extent = max(abs(line.b.x - line.a.x), abs(line.b.y - line.a.y))
    return math.ceil(extent) + 1


def sample_points(line: LineLabel) -> list[Point2]:
    """Evenly spaced points from one endpoint to the other, inclusive."""
    n = n_sample_points(line)
    if n == 1:
        return [line.a]
    ax, ay = line.a.x, line.a.y
    dx, dy = line.b.x - ax, line.b.y - ay
    pts = [Point2(ax + dx * i / (n - 1), ay + dy * i / (n - 1)) for i in range(n - 1)]
    pts.append(line.b)  # exact endpoint, no interpolation residue
    return pts


def slope_angle(line: LineLabel) -> float:
    """Angle of the segment in radians, normalized to [-pi/2, pi/2).

    The label is undirected, so a half-turn range suffices.
    """
    if line.is_degenerate:
        raise ValueError("zero-length label")
    theta = math.atan2(line.b.y - line.a.y, line.b.x - line.a.x)
    if theta >= math.pi / 2:
        theta -= math.pi
    elif theta < -math.pi / 2:
        theta += math.pi
    return theta


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def clamp_label(label: LineLabel, width: int, height: int) -> LineLabel:
    """Clamp both endpoints onto the pixel grid [0, w-1] x [0, h-1]."""
    def cp(p: Point2) -> Point2:
        return Point2(_clamp(p.x, 0.0, width - 1.0), _clamp(p.y, 0.0, height - 1.0))

    return LineLabel(cp(label.a), cp(label.b))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise AnnotationError(msg)


def annotation_from_dict(doc: dict[str, Any]) -> AnnotationSet:
    """Build an AnnotationSet from the annotation JSON schema.

    Schema: ``{"image": id, "width": W, "height": H,
    "labels": [{"x1","y1","x2","y2"}, ...]}``. Labels reaching past the
    image bounds are clamped with a warning rather than rejected.
    """
    _require(isinstance(doc, dict), "annotation document must be a JSON object")
    for key in ("image", "width", "height", "labels"):
        _require(key in doc, f"missing required key {key!r}")
    image_id = doc["image"]
    _require(isinstance(image_id, str) and image_id != "", "'image' must be a non-empty string")
    width, height = doc["width"], doc["height"]
    _require(
        isinstance(width, int) and not isinstance(width, bool) and width > 0,
        f"{image_id!r}: 'width' must be a positive integer",
    )
    _require(
        isinstance(height, int) and not isinstance(height, bool) and height > 0,
        f"{image_id!r}: 'height' must be a positive integer",
    )
    raw_labels = doc["labels"]
    _require(isinstance(raw_labels, list), f"{image_id!r}: 'labels' must be a list")

    labels = []
    for i, item in enumerate(raw_labels):
        _require(isinstance(item, dict), f"{image_id!r}: label {i} must be an object")
        coords = []
        for key in ("x1", "y1", "x2", "y2"):
            _require(key in item, f"{image_id!r}: label {i} missing {key!r}")
            v = item[key]
            _require(
                isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                f"{image_id!r}: label {i} key {key!r} must be a finite number",
            )
            coords.append(float(v))
        x1, y1, x2, y2 = coords
        label = LineLabel(Point2(x1, y1), Point2(x2, y2))
        clamped = clamp_label(label, width, height)
        if clamped != label:
            log.warning(
                "%s: label %d (%.6g,%.6g)-(%.6g,%.6g) extends past %dx%d bounds; clamped",
                image_id, i, x1, y1, x2, y2, width, height,
            )
        labels.append(clamped)
    return AnnotationSet(image_id=image_id, width=width, height=height, labels=tuple(labels))


def annotation_to_dict(ann: AnnotationSet) -> dict[str, Any]:
    """Serialize an AnnotationSet to the annotation JSON schema."""
    return {
        "image": ann.image_id,
        "width": ann.width,
        "height": ann.height,
        "labels": [
            {"x1": lb.a.x, "y1": lb.a.y, "x2": lb.b.x, "y2": lb.b.y} for lb in ann.labels
        ],
    }


def load_annotations(path: str | Path) -> list[AnnotationSet]:
    """Load annotation sets from a JSON file.

    The file may hold one annotation object or an array of them (one per
    image). Raises AnnotationError with the file name on malformed input.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"{path}: invalid JSON: {exc}") from exc
    items: Iterable[Any] = doc if isinstance(doc, list) else [doc]
    out = []
    for item in items:
        try:
            out.append(annotation_from_dict(item))
        except AnnotationError as exc:
            raise AnnotationError(f"{path}: {exc}") from exc
    return out


def save_annotations(path: str | Path, anns: AnnotationSet | list[AnnotationSet]) -> None:
    """Write one annotation object, or an array for a list."""
    if isinstance(anns, AnnotationSet):
        doc: Any = annotation_to_dict(anns)
    else:
        doc = [annotation_to_dict(a) for a in anns]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
