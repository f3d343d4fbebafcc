"""Cell-image corpus loading and deterministic stratified splits.

The on-disk layout is the public NIH one: a root directory containing
``Parasitized/`` and ``Uninfected/`` subdirectories of PNG files. Class
indices follow alphabetical directory order, so parasitized = 0.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import DataError, LayoutError

log = logging.getLogger(__name__)

CLASS_DIRS = ["Parasitized", "Uninfected"]


@dataclass
class LabeledImage:
    pixels: np.ndarray  # float32 CxHxW in [0,1]
    label: int
    path: str


@dataclass
class LoadReport:
    expected_layout: list[str] = field(default_factory=lambda: list(CLASS_DIRS))
    class_counts: dict[str, int] = field(default_factory=dict)
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.class_counts.values())


@dataclass
class DatasetSplit:
    """Index lists over a shared sample table; disjoint and exhaustive."""

    samples: list[LabeledImage]
    train: list[int]
    val: list[int]
    test: list[int]
    seed: int

    def subset(self, name: str) -> list[LabeledImage]:
        idx = {"train": self.train, "val": self.val, "test": self.test}[name]
        return [self.samples[i] for i in idx]


def decode_image_bytes(data: bytes, image_size: int) -> np.ndarray:
    """Decode a PNG byte string to a float32 CxHxW tensor in [0,1].

    This is the single preprocessing path shared by the dataset loader, the
    CLI, and the HTTP service, so offline and served predictions see
    bit-identical inputs.
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgb = img.convert("RGB").resize((image_size, image_size), Image.BILINEAR)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DataError(f"undecodable image: {exc}") from exc
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def load_image(path, image_size: int) -> np.ndarray:
    return decode_image_bytes(Path(path).read_bytes(), image_size)


def load_dataset(root_dir, image_size: int = 64) -> tuple[list[LabeledImage], LoadReport]:
    """Load every decodable PNG under the two class directories.

    Samples come back ordered by sorted path (independent of filesystem
    enumeration order); undecodable files are warned about, skipped, and
    tallied in the report.
    """
    root = Path(root_dir)
    report = LoadReport()
    samples: list[LabeledImage] = []
    for label, class_dir in enumerate(CLASS_DIRS):
        directory = root / class_dir
        if not directory.is_dir():
            raise LayoutError(f"missing class directory: {directory}")
        paths = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == ".png")
        if not paths:
            raise LayoutError(f"class directory has no PNG files: {directory}")
        count = 0
        for path in paths:
            try:
                pixels = load_image(path, image_size)
            except DataError as exc:
                log.warning("skipping %s: %s", path, exc)
                report.skipped.append((str(path), str(exc)))
                continue
            samples.append(LabeledImage(pixels=pixels, label=label, path=str(path)))
            count += 1
        report.class_counts[class_dir] = count
    log.info("loaded %d samples (%s), skipped %d", report.total,
             ", ".join(f"{k}={v}" for k, v in report.class_counts.items()), len(report.skipped))
    return samples, report


def split(
    samples: list[LabeledImage],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 42,
) -> DatasetSplit:
    """Stratified train/val/test partition.

    Within each class the indices are shuffled by a generator seeded from
    ``seed``; floor(r_val*n) go to val, floor(r_test*n) to test, and the
    remainder to train. Same seed, same lists, bit for bit.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must sum to 1, got {ratios}")
    if not samples:
        raise DataError("no samples to split")
    labels = sorted({s.label for s in samples})
    by_class = {lbl: [i for i, s in enumerate(samples) if s.label == lbl] for lbl in labels}
    for lbl, idx in by_class.items():
        if not idx:
            raise DataError(f"class {lbl} has no samples")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    train: list[int] = []
    val: list[int] = []
    test: list[int] = []
    for lbl in labels:
        idx = np.array(by_class[lbl])
        rng.shuffle(idx)
        n = len(idx)
        n_val = int(ratios[1] * n)
        n_test = int(ratios[2] * n)
        val.extend(idx[:n_val].tolist())
        test.extend(idx[n_val : n_val + n_test].tolist())
        train.extend(idx[n_val + n_test :].tolist())
    return DatasetSplit(samples=samples, train=train, val=val, test=test, seed=seed)


def stratified_subset(samples: list[LabeledImage], n: int, seed: int = 42) -> list[LabeledImage]:
    """Deterministically pick n samples, classes balanced within one sample."""
    if n > len(samples):
        raise DataError(f"requested {n} samples but only {len(samples)} available")
    labels = sorted({s.label for s in samples})
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    pools = []
    for lbl in labels:
        idx = np.array([i for i, s in enumerate(samples) if s.label == lbl])
        rng.shuffle(idx)
        pools.append(list(idx))
    picked: list[int] = []
    cursor = 0
    while len(picked) < n:
        pool = pools[cursor % len(pools)]
        if pool:
            picked.append(pool.pop())
        elif all(not p for p in pools):
            break
        cursor += 1
    return [samples[i] for i in sorted(picked)]
