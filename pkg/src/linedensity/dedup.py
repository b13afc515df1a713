"""Dataset deduplication by multi-scale feature distance.

Two images are compared through five per-image feature tensors; the
distance is the sum over layers of the size-normalized squared
difference. Images closer than a threshold to an already-kept image are
dropped in a single greedy pass over the input order, keeping the
earlier image.

The canonical feature source is a precomputed stack file (FST5 format),
so deep-network features can be supplied externally. A lightweight
grayscale pyramid is built in as a stand-in extractor so the pipeline
runs self-contained; it is NOT a substitute for learned features.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter

FST5_MAGIC = b"FST5"
N_LAYERS = 5

DEFAULT_THRESHOLD = 2.0

# smallest image the built-in pyramid can halve four times
_MIN_PYRAMID_SIZE = 32


@dataclass(frozen=True, slots=True)
class FeatureStack:
    """Five (channels, height, width) tensors describing one image."""

    image_id: str
    layers: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.layers) != N_LAYERS:
            raise ValueError(
                f"{self.image_id!r}: expected {N_LAYERS} layers, got {len(self.layers)}"
            )
        for j, layer in enumerate(self.layers):
            if layer.ndim != 3 or min(layer.shape) <= 0:
                raise ValueError(
                    f"{self.image_id!r}: layer {j} must be (C, H, W) with positive dims, "
                    f"got shape {layer.shape}"
                )
        object.__setattr__(self, "layers", tuple(self.layers))


def feature_distance(fa: FeatureStack, fb: FeatureStack) -> float:
    """Sum over layers of squared difference over (channels*height*width)."""
    total = 0.0
    for j, (la, lb) in enumerate(zip(fa.layers, fb.layers)):
        if la.shape != lb.shape:
            raise ValueError(
                f"layer {j} shape mismatch: {fa.image_id!r} has {la.shape}, "
                f"{fb.image_id!r} has {lb.shape}"
            )
        diff = la.astype(np.float64) - lb.astype(np.float64)
        total += float((diff * diff).sum()) / la.size
    return total


@dataclass(frozen=True, slots=True)
class DropEvent:
    """Audit-trail entry: which kept image caused a drop, and at what distance."""

    dropped_id: str
    kept_id: str
    distance: float


def greedy_filter(
    ids: Sequence[str],
    distance: Callable[[str, str], float],
    threshold: float,
) -> tuple[list[str], list[DropEvent]]:
    """Sequential keep/drop scan over ``ids`` in order.

    An id is dropped when its distance to any already-kept id is strictly
    below the threshold (the first such kept id is recorded); otherwise
    it is kept. Keep-first/drop-later makes the outcome deterministic and
    auditable.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    kept: list[str] = []
    dropped: list[DropEvent] = []
    for candidate in ids:
        for keeper in kept:
            d = distance(candidate, keeper)
            if d < threshold:
                dropped.append(DropEvent(candidate, keeper, d))
                break
        else:
            kept.append(candidate)
    return kept, dropped


def deduplicate(
    stacks: Sequence[FeatureStack], threshold: float = DEFAULT_THRESHOLD
) -> tuple[list[str], list[DropEvent]]:
    """Greedy feature-distance dedup over stacks in input order."""
    by_id = {s.image_id: s for s in stacks}
    if len(by_id) != len(stacks):
        raise ValueError("duplicate image ids in input")
    return greedy_filter(
        [s.image_id for s in stacks],
        lambda a, b: feature_distance(by_id[a], by_id[b]),
        threshold,
    )


def _to_grayscale(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        gray = image.astype(np.float64)
    elif image.ndim == 3 and image.shape[2] in (3, 4):
        rgb = image[..., :3].astype(np.float64)
        gray = rgb @ np.array([0.299, 0.587, 0.114])
    else:
        raise ValueError(f"expected grayscale or RGB image, got shape {image.shape}")
    if np.issubdtype(image.dtype, np.integer):
        gray /= 255.0
    return gray


def builtin_feature_pyramid(image: np.ndarray, image_id: str = "") -> FeatureStack:
    """Deterministic 5-level blur-and-halve pyramid of the grayscale image.

    Level j is a (1, H/2^j, W/2^j) tensor: level 0 is the grayscale image,
    each further level is Gaussian-blurred then 2x2 mean-pooled. A crude
    stand-in for a learned extractor, useful for tests and demos only.
    """
    gray = _to_grayscale(image)
    h, w = gray.shape
    if min(h, w) < _MIN_PYRAMID_SIZE:
        raise ValueError(
            f"image must be at least {_MIN_PYRAMID_SIZE}x{_MIN_PYRAMID_SIZE}, got {w}x{h}"
        )
    layers = [gray[np.newaxis, :, :]]
    level = gray
    for _ in range(N_LAYERS - 1):
        blurred = gaussian_filter(level, sigma=1.0, mode="nearest")
        hh, ww = (blurred.shape[0] // 2) * 2, (blurred.shape[1] // 2) * 2
        level = blurred[:hh, :ww].reshape(hh // 2, 2, ww // 2, 2).mean(axis=(1, 3))
        layers.append(level[np.newaxis, :, :])
    return FeatureStack(image_id=image_id, layers=tuple(layers))


def save_stack(path: str | Path, stack: FeatureStack) -> None:
    """Write the FST5 format: magic, u32 layer count, then per layer
    u32 C, H, W and C*H*W little-endian float32 values."""
    parts = [FST5_MAGIC, struct.pack("<I", len(stack.layers))]
    for layer in stack.layers:
        c, h, w = layer.shape
        parts.append(struct.pack("<III", c, h, w))
        parts.append(np.ascontiguousarray(layer, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_stack(path: str | Path, image_id: str | None = None) -> FeatureStack:
    """Read an FST5 file; the image id defaults to the file stem."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 8 or raw[:4] != FST5_MAGIC:
        raise ValueError(f"{path}: not an FST5 file")
    (n_layers,) = struct.unpack_from("<I", raw, 4)
    if n_layers != N_LAYERS:
        raise ValueError(f"{path}: expected {N_LAYERS} layers, header says {n_layers}")
    offset = 8
    layers = []
    for j in range(n_layers):
        if offset + 12 > len(raw):
            raise ValueError(f"{path}: truncated at layer {j} header")
        c, h, w = struct.unpack_from("<III", raw, offset)
        offset += 12
        nbytes = 4 * c * h * w
        if offset + nbytes > len(raw):
            raise ValueError(f"{path}: truncated at layer {j} data")
        values = np.frombuffer(raw, dtype="<f4", count=c * h * w, offset=offset)
        layers.append(values.reshape(c, h, w).astype(np.float64))
        offset += nbytes
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes")
    return FeatureStack(image_id=image_id or path.stem, layers=tuple(layers))
