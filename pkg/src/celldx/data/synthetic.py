"""Procedural stand-in blood-cell images.

Generates stained-smear-style crops: a roughly elliptical cell on a dark
field, with parasitized samples carrying one to three dark chromatin-like
blobs inside the cell body. Useful for demos, end-to-end tests, and desk
runs when the real corpus is not on disk. Entirely deterministic from a
seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import CLASS_DIRS, LabeledImage


def _cell_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2, index)))


def make_cell_image(label: int, seed: int, index: int, size: int = 64) -> np.ndarray:
    """Render one float32 CxHxW cell image in [0,1]."""
    rng = _cell_rng(seed, index)
    ys, xs = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")

    cy = size / 2 + rng.uniform(-0.06, 0.06) * size
    cx = size / 2 + rng.uniform(-0.06, 0.06) * size
    ry = size * rng.uniform(0.30, 0.42)
    rx = size * rng.uniform(0.30, 0.42)
    theta = rng.uniform(0, np.pi)
    dy, dx = ys - cy, xs - cx
    u = dy * np.cos(theta) + dx * np.sin(theta)
    v = -dy * np.sin(theta) + dx * np.cos(theta)
    dist = np.sqrt((u / ry) ** 2 + (v / rx) ** 2)

    base = np.array([0.86, 0.62, 0.58]) + rng.uniform(-0.08, 0.08, size=3)
    img = np.zeros((3, size, size), dtype=np.float64)
    img += 0.04 + 0.02 * rng.standard_normal((3, size, size))
    shading = 1.0 - 0.25 * dist.clip(0, 1)
    for ch in range(3):
        img[ch] = np.where(dist < 1.0, base[ch] * shading, img[ch])
    img += 0.03 * rng.standard_normal((3, size, size)) * (dist < 1.0)

    if label == 0:  # parasitized: dark stained blobs inside the cell
        for _ in range(rng.integers(1, 4)):
            ang = rng.uniform(0, 2 * np.pi)
            rad = rng.uniform(0.0, 0.55)
            by = cy + rad * ry * np.sin(ang)
            bx = cx + rad * rx * np.cos(ang)
            br = size * rng.uniform(0.05, 0.11)
            blob = np.exp(-(((ys - by) ** 2 + (xs - bx) ** 2) / (2 * br**2)))
            tint = np.array([0.35, 0.08, 0.42]) + rng.uniform(-0.05, 0.05, size=3)
            for ch in range(3):
                img[ch] = img[ch] * (1 - 0.9 * blob) + tint[ch] * 0.9 * blob
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def make_cell_dataset(n: int, seed: int = 42, size: int = 64) -> list[LabeledImage]:
    """Balanced in-memory corpus of n synthetic cells (labels alternate)."""
    samples = []
    for i in range(n):
        label = i % 2
        pixels = make_cell_image(label, seed, i, size)
        samples.append(
            LabeledImage(
                pixels=pixels,
                label=label,
                path=f"synthetic://{CLASS_DIRS[label]}/{i:05d}.png",
            )
        )
    return samples


def write_cell_dataset(root_dir, n: int, seed: int = 42, size: int = 64) -> Path:
    """Materialize a synthetic corpus as an NIH-layout PNG directory tree."""
    root = Path(root_dir)
    for class_dir in CLASS_DIRS:
        (root / class_dir).mkdir(parents=True, exist_ok=True)
    for i in range(n):
        label = i % 2
        pixels = make_cell_image(label, seed, i, size)
        arr = (pixels.transpose(1, 2, 0) * 255.0).round().astype(np.uint8)
        Image.fromarray(arr).save(root / CLASS_DIRS[label] / f"cell_{i:05d}.png")
    return root
