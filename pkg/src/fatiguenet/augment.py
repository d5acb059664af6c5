"""On-the-fly affine image augmentation.

A sampled transform is applied by inverse mapping: for each output pixel o
(x right, y down) the source location is

    s = C + M (o - C) + (tx, ty),        C = ((W-1)/2, (H-1)/2)

with M = R(theta) Sh(sigma) Z(zx, zy), all angles in degrees:

    R  = [[cos t, -sin t], [sin t, cos t]]
    Sh = [[1, -sin s], [0, cos s]]
    Z  = [[zx, 0], [0, zy]]

s is rounded to the nearest pixel (ties to even) and clamped to the image,
so out-of-frame samples replicate the nearest edge. A horizontal flip, when
drawn, is applied last as a column reversal. With all ranges zero the
pipeline is an exact identity apart from the intensity rescale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .rng import Rng


@dataclass(frozen=True)
class AugmentParams:
    """Sampling ranges. Defaults match the training runs: rotation up to 40
    degrees, shifts up to 20% of the frame, shear up to 0.2 degrees, zoom
    20% per axis, coin-flip mirroring, intensities scaled to [0, 1]."""

    rotation_range: float = 40.0     # degrees, symmetric
    width_shift_range: float = 0.2   # fraction of width
    height_shift_range: float = 0.2  # fraction of height
    shear_range: float = 0.2         # degrees, symmetric
    zoom_range: float = 0.2          # factors drawn from [1-z, 1+z]
    horizontal_flip: bool = True
    fill_mode: str = "nearest"
    rescale: float = 1.0 / 255.0

    def __post_init__(self):
        for name in ("rotation_range", "width_shift_range", "height_shift_range",
                     "shear_range", "zoom_range"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.fill_mode != "nearest":
            raise ValueError(f"only 'nearest' fill is supported, got {self.fill_mode!r}")


@dataclass(frozen=True)
class SampledTransform:
    theta: float  # rotation, degrees
    tx: float     # shift along x, pixels
    ty: float     # shift along y, pixels
    sigma: float  # shear, degrees
    zx: float
    zy: float
    flip: bool


IDENTITY_TRANSFORM = SampledTransform(0.0, 0.0, 0.0, 0.0, 1.0, 1.0, False)


def sample_transform(params: AugmentParams, rng: Rng, height: int, width: int) -> SampledTransform:
    """Draw one transform. Draw order is fixed (theta, tx, ty, sigma, zx, zy,
    flip); the flip coin is only consumed when flipping is enabled."""
    r = params.rotation_range
    theta = rng.uniform(-r, r)
    tx = rng.uniform(-params.width_shift_range * width, params.width_shift_range * width)
    ty = rng.uniform(-params.height_shift_range * height, params.height_shift_range * height)
    sigma = rng.uniform(-params.shear_range, params.shear_range)
    zx = rng.uniform(1.0 - params.zoom_range, 1.0 + params.zoom_range)
    zy = rng.uniform(1.0 - params.zoom_range, 1.0 + params.zoom_range)
    flip = rng.bernoulli(0.5) if params.horizontal_flip else False
    return SampledTransform(theta, tx, ty, sigma, zx, zy, flip)


def transform_matrix(t: SampledTransform) -> np.ndarray:
    th = math.radians(t.theta)
    sg = math.radians(t.sigma)
    rot = np.array([[math.cos(th), -math.sin(th)],
                    [math.sin(th), math.cos(th)]])
    shear = np.array([[1.0, -math.sin(sg)],
                      [0.0, math.cos(sg)]])
    zoom = np.array([[t.zx, 0.0],
                     [0.0, t.zy]])
    return rot @ shear @ zoom


def apply_affine(image: np.ndarray, t: SampledTransform) -> np.ndarray:
    """Warp a 2-D image by inverse mapping with nearest-neighbour sampling."""
    image = np.asarray(image)
    if image.ndim != 2 or image.shape[0] < 1 or image.shape[1] < 1:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    h, w = image.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    m = transform_matrix(t)
    ox, oy = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    dx, dy = ox - cx, oy - cy
    sx = cx + m[0, 0] * dx + m[0, 1] * dy + t.tx
    sy = cy + m[1, 0] * dx + m[1, 1] * dy + t.ty
    ix = np.clip(np.rint(sx).astype(np.int64), 0, w - 1)
    iy = np.clip(np.rint(sy).astype(np.int64), 0, h - 1)
    out = image[iy, ix]
    if t.flip:
        out = out[:, ::-1]
    return np.ascontiguousarray(out)


def rescale(image: np.ndarray, factor: float) -> np.ndarray:
    image = np.asarray(image)
    return image * image.dtype.type(factor) if image.dtype.kind == "f" \
        else image.astype(np.float32) * np.float32(factor)


def augment_sample(image: np.ndarray, params: AugmentParams, rng: Rng) -> np.ndarray:
    """Sample one transform from rng, warp, then rescale intensities."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    t = sample_transform(params, rng, image.shape[0], image.shape[1])
    return rescale(apply_affine(image, t), params.rescale)
