"""Dataset ingestion, splits, augmentation, and the NPY codec."""

from .augmentation import IDENTITY_AUGMENT, AugmentConfig, apply_affine, augment, sample_rng
from .dataset import (
    CLASS_DIRS,
    DatasetSplit,
    LabeledImage,
    LoadReport,
    decode_image_bytes,
    load_dataset,
    load_image,
    split,
    stratified_subset,
)
from .npy import load_npy, parse_npy, save_npy, write_npy

__all__ = [
    "IDENTITY_AUGMENT", "AugmentConfig", "apply_affine", "augment", "sample_rng",
    "CLASS_DIRS", "DatasetSplit", "LabeledImage", "LoadReport", "decode_image_bytes",
    "load_dataset", "load_image", "split", "stratified_subset",
    "load_npy", "parse_npy", "save_npy", "write_npy",
]
