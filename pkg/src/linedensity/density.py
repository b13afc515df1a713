"""Ground-truth density maps from annotations, and count extraction.

Three labeling schemes are supported:

* ``dot``  - one isotropic kernel at each segment midpoint
* ``line`` - one isotropic kernel per sampled segment point, with the
  spread growing toward the segment middle; each segment's stack is
  normalized to unit mass before accumulation
* ``agk``  - one anisotropic kernel per segment, rotated to the
  segment's slope

Every label contributes exactly mass 1 (renormalization after window
truncation and boundary clipping), so a map's integral equals its label
count. Maps are stored in the DMAP binary format; a 16-bit PGM export
exists for visual inspection.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import AnnotationSet, line_length, midpoint, sample_points, slope_angle
from .kernels import KernelConfig, KernelPatch, agk_patch, agk_sigmas, isotropic_patch, line_sigma

DMAP_MAGIC = b"DMAP"

# below this length a segment is indistinguishable from a dot label
_DEGENERATE_LENGTH = 1.0

SCHEMES = ("dot", "line", "agk")


@dataclass(frozen=True, slots=True)
class DensityMap:
    """A width x height grid of non-negative reals, row-major, origin top-left."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.width}x{self.height}"
            )
        if self.values.size and float(self.values.min()) < 0.0:
            raise ValueError("density map contains negative values")


def count_from_density(dmap: DensityMap) -> float:
    """Object count: the element-wise sum of the map. Never rounded here."""
    return float(dmap.values.sum())


def _clipped_view(patch: KernelPatch, width: int, height: int):
    """Intersection of a patch with the image; None when fully outside."""
    x0, y0 = patch.origin
    gx0, gy0 = max(x0, 0), max(y0, 0)
    gx1 = min(x0 + patch.width, width)
    gy1 = min(y0 + patch.height, height)
    if gx0 >= gx1 or gy0 >= gy1:
        return None
    sub = patch.values[gy0 - y0 : gy1 - y0, gx0 - x0 : gx1 - x0]
    return (slice(gy0, gy1), slice(gx0, gx1)), sub


def _stamp_unit(grid: np.ndarray, patch: KernelPatch) -> None:
    """Add a patch with its clipped portion renormalized to mass 1."""
    view = _clipped_view(patch, grid.shape[1], grid.shape[0])
    if view is None:
        return
    window, sub = view
    grid[window] += sub / sub.sum()


def dot_density_map(ann: AnnotationSet, config: KernelConfig) -> DensityMap:
    """Isotropic kernel with sigma_basic at each label midpoint."""
    grid = np.zeros((ann.height, ann.width), dtype=np.float64)
    for label in ann.labels:
        _stamp_unit(grid, isotropic_patch(midpoint(label), config.sigma_basic, config))
    return DensityMap(ann.width, ann.height, grid)


def line_density_map(ann: AnnotationSet, config: KernelConfig) -> DensityMap:
    """Per-point isotropic kernels along each segment.

    Each segment's accumulated stack is normalized to unit mass before
    being added to the output, so one label is one count regardless of
    how many points represent it or how much the boundary clips.
    """
    grid = np.zeros((ann.height, ann.width), dtype=np.float64)
    for label in ann.labels:
        points = sample_points(label)
        patches = [
            isotropic_patch(p, line_sigma(i, len(points), config), config)
            for i, p in enumerate(points)
        ]
        views = [_clipped_view(p, ann.width, ann.height) for p in patches]
        views = [v for v in views if v is not None]
        if not views:
            continue
        # accumulate on the union bounding box only, not the whole image
        y0 = min(v[0][0].start for v in views)
        y1 = max(v[0][0].stop for v in views)
        x0 = min(v[0][1].start for v in views)
        x1 = max(v[0][1].stop for v in views)
        acc = np.zeros((y1 - y0, x1 - x0), dtype=np.float64)
        for (wy, wx), sub in views:
            acc[wy.start - y0 : wy.stop - y0, wx.start - x0 : wx.stop - x0] += sub
        grid[y0:y1, x0:x1] += acc / acc.sum()
    return DensityMap(ann.width, ann.height, grid)


def agk_density_map(ann: AnnotationSet, config: KernelConfig) -> DensityMap:
    """One anisotropic kernel per segment, aligned to the segment slope.

    Sub-pixel segments fall back to the dot placement so annotation slips
    do not break batch jobs.
    """
    grid = np.zeros((ann.height, ann.width), dtype=np.float64)
    for label in ann.labels:
        if line_length(label) < _DEGENERATE_LENGTH:
            patch = isotropic_patch(midpoint(label), config.sigma_basic, config)
        else:
            sigma1, sigma2 = agk_sigmas(label, config)
            patch = agk_patch(midpoint(label), sigma1, sigma2, slope_angle(label), config)
        _stamp_unit(grid, patch)
    return DensityMap(ann.width, ann.height, grid)


_GENERATORS = {
    "dot": dot_density_map,
    "line": line_density_map,
    "agk": agk_density_map,
}


def density_map(ann: AnnotationSet, config: KernelConfig, scheme: str) -> DensityMap:
    """Dispatch to one of the labeling schemes by name."""
    try:
        generator = _GENERATORS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}") from None
    return generator(ann, config)


def save_dmap(path: str | Path, dmap: DensityMap) -> None:
    """Write the DMAP binary format.

    Magic "DMAP", little-endian u32 width and height, then width*height
    little-endian float32 values, row-major, origin top-left.
    """
    header = struct.pack("<4sII", DMAP_MAGIC, dmap.width, dmap.height)
    body = np.ascontiguousarray(dmap.values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def load_dmap(path: str | Path) -> DensityMap:
    """Read a DMAP file back into a float64 map."""
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != DMAP_MAGIC:
        raise ValueError(f"{path}: not a DMAP file")
    width, height = struct.unpack_from("<II", raw, 4)
    expected = 12 + 4 * width * height
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f4", offset=12).astype(np.float64)
    return DensityMap(width, height, values.reshape(height, width))


def save_pgm(path: str | Path, dmap: DensityMap) -> None:
    """16-bit PGM export with values scaled by the map maximum."""
    peak = float(dmap.values.max()) if dmap.values.size else 0.0
    if peak > 0.0:
        scaled = np.round(dmap.values / peak * 65535.0).astype(">u2")
    else:
        scaled = np.zeros((dmap.height, dmap.width), dtype=">u2")
    header = f"P5\n{dmap.width} {dmap.height}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + scaled.tobytes())
