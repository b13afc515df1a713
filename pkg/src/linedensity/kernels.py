"""Gaussian kernel patches on pixel grids.

Two kernel families are evaluated here: isotropic Gaussians (for dot
labels and per-point line placement) and anisotropic Gaussians whose
major axis follows the annotated segment. Patches are evaluated at
integer pixel centers on a finite window and renormalized to unit mass,
so each placed kernel contributes exactly one count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annotations import LineLabel, Point2, line_length

# FWHM of a unit-sigma Gaussian: 2*sqrt(2*ln 2)
FWHM_CONST = 2.355


@dataclass(frozen=True, slots=True)
class KernelConfig:
    """All kernel hyperparameters in one place.

    sigma_basic   spread at segment endpoints (pixels)
    expand_factor growth of sigma per sampling step toward the middle
    aspect_ratio  object length / width; sets the minor-axis spread
    fwhm_const    full width at half maximum of a unit-sigma Gaussian
    alpha         FWHM penalizer; larger values tighten the major axis
    trunc_mult    evaluation window half-width, in units of sigma
    """

    sigma_basic: float = 15.0
    expand_factor: float = 0.2
    aspect_ratio: float = 4.0
    fwhm_const: float = FWHM_CONST
    alpha: float = 4.0
    trunc_mult: float = 3.0

    def __post_init__(self) -> None:
        for name in ("sigma_basic", "expand_factor", "aspect_ratio",
                     "fwhm_const", "alpha", "trunc_mult"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.aspect_ratio < 1:
            raise ValueError("aspect_ratio must be >= 1")


@dataclass(frozen=True, slots=True)
class KernelPatch:
    """A dense unit-mass grid positioned on the image pixel lattice.

    ``origin`` is the (x, y) image coordinate of values[0, 0]; ``values``
    is row-major (height, width).
    """

    origin: tuple[int, int]
    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _pixel_round(v: float) -> int:
    # round-half-up keeps window placement stable under integer shifts
    return int(math.floor(v + 0.5))


def line_sigma(point_index: int, n_points: int, config: KernelConfig) -> float:
    """Spread for the point at ``point_index`` of an n-point segment.

    sigma_basic plus expand_factor times the distance to the nearer
    endpoint, counted in sampling steps: smallest at the two endpoints,
    largest at the middle of the segment.
    """
    if not 0 <= point_index < n_points:
        raise ValueError(f"point_index {point_index} outside [0, {n_points})")
    return config.sigma_basic + config.expand_factor * min(
        point_index, n_points - 1 - point_index
    )


def agk_sigmas(line: LineLabel, config: KernelConfig) -> tuple[float, float]:
    """Major/minor spreads for the anisotropic kernel of a segment.

    sigma1 = (length / 2) * (fwhm_const / alpha), chosen so the kernel's
    half-maximum extent tracks the segment; sigma2 = sigma1 / aspect_ratio.
    """
    length = line_length(line)
    if length == 0.0:
        raise ValueError("zero-length label")
    sigma1 = (length / 2.0) * (config.fwhm_const / config.alpha)
    return sigma1, sigma1 / config.aspect_ratio


def _window_1d(center: float, radius: int) -> np.ndarray:
    c = _pixel_round(center)
    return np.arange(c - radius, c + radius + 1, dtype=np.float64)


def isotropic_patch(mu: Point2, sigma: float, config: KernelConfig) -> KernelPatch:
    """Unit-mass isotropic Gaussian evaluated around ``mu``.

    The window half-width is ceil(trunc_mult * sigma) pixels; values are
    exp(-|x - mu|^2 / (2 sigma^2)) at integer pixel centers, renormalized
    after truncation. ``mu`` may be fractional.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = math.ceil(config.trunc_mult * sigma)
    xs = _window_1d(mu.x, r)
    ys = _window_1d(mu.y, r)
    inv = 1.0 / (2.0 * sigma * sigma)
    gx = np.exp(-((xs - mu.x) ** 2) * inv)
    gy = np.exp(-((ys - mu.y) ** 2) * inv)
    values = np.outer(gy, gx)
    values /= values.sum()
    return KernelPatch(origin=(int(xs[0]), int(ys[0])), values=values)


def agk_patch(
    mu: Point2,
    sigma1: float,
    sigma2: float,
    theta: float,
    config: KernelConfig,
) -> KernelPatch:
    """Unit-mass anisotropic Gaussian with its major axis at angle ``theta``.

    Pixel offsets from ``mu`` are rotated into the segment frame
    analytically (no resampling), then weighted by
    exp(-(u^2/(2 sigma1^2) + v^2/(2 sigma2^2))).

    The base window is the segment-length square implied by sigma1, and
    expands to ceil(trunc_mult * sigma1) half-width whenever that square
    would clip more than the truncation rule allows.
    """
    if not sigma1 >= sigma2 > 0:
        raise ValueError(f"require sigma1 >= sigma2 > 0, got ({sigma1}, {sigma2})")
    # invert the sigma schedule to recover the segment length
    length = 2.0 * sigma1 * config.alpha / config.fwhm_const
    r = math.ceil(max(length / 2.0, config.trunc_mult * sigma1))
    xs = _window_1d(mu.x, r)
    ys = _window_1d(mu.y, r)
    dx, dy = np.meshgrid(xs - mu.x, ys - mu.y)
    ct, st = math.cos(theta), math.sin(theta)
    u = dx * ct + dy * st
    v = -dx * st + dy * ct
    values = np.exp(-(u * u) / (2.0 * sigma1 * sigma1) - (v * v) / (2.0 * sigma2 * sigma2))
    values /= values.sum()
    return KernelPatch(origin=(int(xs[0]), int(ys[0])), values=values)
