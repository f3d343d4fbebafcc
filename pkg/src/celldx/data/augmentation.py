"""Training-time image augmentation.

One augmentation call composes flip -> rotation -> translation -> zoom into a
single affine map and resamples once with bilinear interpolation, zero
outside the frame. Random draws always happen in that fixed order, so the
stream of consumed random numbers does not depend on the config values and a
given (seed, epoch, sample index) triple always produces the same picture
regardless of batch scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class AugmentConfig:
    rotation_degrees: float = 20.0
    shift: float = 0.10
    zoom: float = 0.10
    flip_probability: float = 0.5

    def __post_init__(self):
        if min(self.rotation_degrees, self.shift, self.zoom, self.flip_probability) < 0:
            raise ConfigurationError(f"augmentation parameters must be non-negative: {self}")
        if self.flip_probability > 1:
            raise ConfigurationError(f"flip probability must be <= 1: {self}")

    def is_identity(self) -> bool:
        return (
            self.rotation_degrees == 0
            and self.shift == 0
            and self.zoom == 0
            and self.flip_probability == 0
        )


IDENTITY_AUGMENT = AugmentConfig(0.0, 0.0, 0.0, 0.0)


def sample_rng(seed: int, epoch: int, index: int) -> np.random.Generator:
    """Per-sample generator derived from (seed, epoch, sample index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(epoch, index)))


def _sample_bilinear(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample CxHxW image at fractional (ys, xs); zero outside the frame."""
    c, h, w = img.shape
    y0 = np.floor(ys)
    x0 = np.floor(xs)
    fy = ys - y0
    fx = xs - x0
    y0 = y0.astype(np.int64)
    x0 = x0.astype(np.int64)

    out = np.zeros((c,) + ys.shape, dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            yy = y0 + dy
            xx = x0 + dx
            wgt = (fy if dy else 1.0 - fy) * (fx if dx else 1.0 - fx)
            valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w) & (wgt > 0)
            if not valid.any():
                continue
            vals = img[:, yy.clip(0, h - 1), xx.clip(0, w - 1)]
            out += np.where(valid, wgt, 0.0) * vals
    return out.astype(img.dtype)


def apply_affine(
    pixels: np.ndarray,
    *,
    flip: bool = False,
    angle_degrees: float = 0.0,
    shift_x: float = 0.0,
    shift_y: float = 0.0,
    zoom: float = 1.0,
) -> np.ndarray:
    """Apply flip/rotate/translate/zoom (in that order) to a CxHxW image.

    Rotation and zoom are about the image center; sampling is bilinear with
    zero fill. When every parameter is at its identity value the input comes
    back pixel-identical.
    """
    c, h, w = pixels.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0

    def mat(a, b, tx, d, e, ty):
        return np.array([[a, b, tx], [d, e, ty], [0.0, 0.0, 1.0]])

    # forward maps, applied to the image in order: flip, rotate, translate, zoom
    transforms = []
    if flip:
        transforms.append(mat(-1.0, 0.0, 2 * cx, 0.0, 1.0, 0.0))
    if angle_degrees != 0.0:
        th = np.deg2rad(angle_degrees)
        cos_t, sin_t = np.cos(th), np.sin(th)
        about_center = (
            mat(1, 0, cx, 0, 1, cy)
            @ mat(cos_t, -sin_t, 0, sin_t, cos_t, 0)
            @ mat(1, 0, -cx, 0, 1, -cy)
        )
        transforms.append(about_center)
    if shift_x != 0.0 or shift_y != 0.0:
        transforms.append(mat(1, 0, shift_x, 0, 1, shift_y))
    if zoom != 1.0:
        transforms.append(mat(1, 0, cx, 0, 1, cy) @ mat(zoom, 0, 0, 0, zoom, 0) @ mat(1, 0, -cx, 0, 1, -cy))

    forward = np.eye(3)
    for t in transforms:
        forward = t @ forward
    inverse = np.linalg.inv(forward)

    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    src_x = inverse[0, 0] * xs + inverse[0, 1] * ys + inverse[0, 2]
    src_y = inverse[1, 0] * xs + inverse[1, 1] * ys + inverse[1, 2]
    return _sample_bilinear(pixels, src_y, src_x)


def augment(
    pixels: np.ndarray,
    cfg: AugmentConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Randomly transform one CxHxW image in [0,1]; output stays in [0,1]."""
    c, h, w = pixels.shape
    flip = bool(rng.random() < cfg.flip_probability)
    angle = float(rng.uniform(-cfg.rotation_degrees, cfg.rotation_degrees))
    tx = float(rng.uniform(-cfg.shift * w, cfg.shift * w))
    ty = float(rng.uniform(-cfg.shift * h, cfg.shift * h))
    zoom = float(rng.uniform(1.0 - cfg.zoom, 1.0 + cfg.zoom))
    if not flip and angle == 0.0 and tx == 0.0 and ty == 0.0 and zoom == 1.0:
        return pixels.copy()
    out = apply_affine(
        pixels, flip=flip, angle_degrees=angle, shift_x=tx, shift_y=ty, zoom=zoom
    )
    return np.clip(out, 0.0, 1.0)
