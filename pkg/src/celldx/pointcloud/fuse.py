"""Back-projection of multi-view depth maps into a world-frame point cloud."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .camera import ViewPose


@dataclass
class PointCloud:
    """N world-frame points as a float32 (N,3) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float32).reshape(-1, 3)
        if pts.size and not np.isfinite(pts).all():
            raise DataError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class DepthMapSet:
    """Per-view depth images (camera-frame z) with emission masks and poses."""

    depths: np.ndarray  # (V, H, W) float
    masks: np.ndarray  # (V, H, W) bool
    poses: list[ViewPose]

    def __post_init__(self):
        d = np.asarray(self.depths)
        m = np.asarray(self.masks, dtype=bool)
        if d.ndim != 3 or m.shape != d.shape:
            raise DataError(f"depths {d.shape} and masks {m.shape} must both be (V,H,W)")
        if d.shape[0] != len(self.poses) or d.shape[0] < 1:
            raise DataError(f"{d.shape[0]} depth views but {len(self.poses)} poses")
        for pose in self.poses:
            if (pose.height, pose.width) != d.shape[1:]:
                raise DataError(
                    f"pose image size {(pose.height, pose.width)} != depth size {d.shape[1:]}"
                )
        self.depths = d
        self.masks = m


def fuse(depth_set: DepthMapSet) -> PointCloud:
    """Inverse-project every masked pixel of every view into world space.

    A pixel (u,v) with depth d lifts to camera coordinates
    ((u+0.5-cx)*d/f, (v+0.5-cy)*d/f, d) and then to the world via the pose.
    Output ordering is deterministic: view index first, then row-major pixels.
    Masked pixels must carry positive finite depth.
    """
    clouds = []
    for view, pose in enumerate(depth_set.poses):
        mask = depth_set.masks[view]
        if not mask.any():
            continue
        depth = depth_set.depths[view]
        bad = mask & ~(np.isfinite(depth) & (depth > 0))
        if bad.any():
            v_bad, u_bad = np.argwhere(bad)[0]
            raise DataError(
                f"non-positive depth at view {view}, pixel (u={u_bad}, v={v_bad}): "
                f"{depth[v_bad, u_bad]}"
            )
        vs, us = np.nonzero(mask)  # row-major order
        d = depth[vs, us].astype(np.float64)
        x = (us + 0.5 - pose.cx) * d / pose.focal
        y = (vs + 0.5 - pose.cy) * d / pose.focal
        cam = np.stack([x, y, d], axis=1)
        world = (cam - pose.translation) @ pose.rotation  # == R^T (cam - t) per row
        clouds.append(world)
    if not clouds:
        return PointCloud(np.empty((0, 3), dtype=np.float32))
    return PointCloud(np.concatenate(clouds).astype(np.float32))
