"""Symmetric chamfer distance between point clouds."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import DataError
from .fuse import PointCloud

_BRUTE_LIMIT = 4_000_000  # pairwise-matrix entries; above this use a KD-tree


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Mean nearest-neighbor distance a->b plus the mean b->a (Euclidean).

    Small inputs use an exact pairwise matrix; large ones a KD-tree. Both
    directions are means over the source cloud, so the result is symmetric
    in its arguments and zero only for equal multisets.
    """
    pa = np.asarray(a.points, dtype=np.float64)
    pb = np.asarray(b.points, dtype=np.float64)
    if len(pa) == 0 or len(pb) == 0:
        raise DataError("chamfer distance needs two non-empty clouds")
    if len(pa) * len(pb) <= _BRUTE_LIMIT:
        d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2)
        fwd = np.sqrt(d2.min(axis=1))
        bwd = np.sqrt(d2.min(axis=0))
    else:
        fwd, _ = cKDTree(pb).query(pa, k=1)
        bwd, _ = cKDTree(pa).query(pb, k=1)
    return float(np.mean(fwd) + np.mean(bwd))
