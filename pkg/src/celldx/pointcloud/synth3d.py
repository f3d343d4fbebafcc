"""Procedural cell-like 3D shapes and an analytic depth renderer.

Shapes are star-shaped radial surfaces: an ellipsoid base modulated by a few
smooth spherical-Gaussian bumps. Being radial, they can be ray-cast to high
precision with bracketing + bisection, which gives exact ground truth for
depth-map fusion and generator training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from .camera import ViewPose, make_fixed_poses
from .fuse import DepthMapSet

DEFAULT_RADIUS = 2.5


@dataclass(frozen=True)
class RadialShape:
    """Surface { rho(d) * d : |d| = 1 } with rho > 0 everywhere."""

    axes: tuple[float, float, float] = (1.0, 1.0, 1.0)
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))
    bump_centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    bump_amps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bump_sharpness: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        """rho for an (N,3) array of unit directions."""
        local = dirs @ self.orientation.T
        a, b, c = self.axes
        base = 1.0 / np.sqrt((local[:, 0] / a) ** 2 + (local[:, 1] / b) ** 2 + (local[:, 2] / c) ** 2)
        mod = np.ones(len(dirs))
        for center, amp, kappa in zip(self.bump_centers, self.bump_amps, self.bump_sharpness):
            mod += amp * np.exp(kappa * (dirs @ center - 1.0))
        return base * mod

    def max_radius(self) -> float:
        return max(self.axes) * (1.0 + float(np.abs(self.bump_amps).sum(initial=0.0)))


def unit_sphere() -> RadialShape:
    return RadialShape()


def random_shape(rng: np.random.Generator) -> RadialShape:
    """Cell-ish blob: mildly anisotropic ellipsoid with 0-3 gentle bumps."""
    axes = tuple(rng.uniform(0.75, 1.25, size=3))
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    n_bumps = int(rng.integers(0, 4))
    centers = rng.standard_normal((n_bumps, 3))
    if n_bumps:
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return RadialShape(
        axes=axes,
        orientation=q,
        bump_centers=centers,
        bump_amps=rng.uniform(-0.10, 0.10, size=n_bumps),
        bump_sharpness=rng.uniform(8.0, 25.0, size=n_bumps),
    )


def render_depth(shape: RadialShape, pose: ViewPose, *, march_steps: int = 96,
                 bisect_iters: int = 42) -> tuple[np.ndarray, np.ndarray]:
    """Ray-cast one view; returns (depth, mask) as (H,W) arrays.

    Depth is the camera-frame z of the first surface hit. Rays that never
    enter the shape get mask False.
    """
    h, w = pose.height, pose.width
    vs, us = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    x = (us.ravel() + 0.5 - pose.cx) / pose.focal
    y = (vs.ravel() + 0.5 - pose.cy) / pose.focal
    dirs_cam = np.stack([x, y, np.ones_like(x)], axis=1)
    dirs_world = dirs_cam @ pose.rotation  # R^T per row
    dirs_world /= np.linalg.norm(dirs_world, axis=1, keepdims=True)
    origin = pose.camera_center()

    def outside(t):
        q = origin[None, :] + t[:, None] * dirs_world
        dist = np.linalg.norm(q, axis=1)
        dist = np.maximum(dist, 1e-12)
        return dist - shape.radial(q / dist[:, None])

    rmax = shape.max_radius() * 1.05
    center_dist = float(np.linalg.norm(origin))
    t0 = max(center_dist - rmax, 1e-6)
    t1 = center_dist + rmax
    ts = np.linspace(t0, t1, march_steps)
    signs = np.stack([outside(np.full(len(dirs_world), t)) for t in ts], axis=1) <= 0
    first = signs.argmax(axis=1)  # first step index inside the shape
    hit = signs.any(axis=1) & (first > 0)

    lo = ts[first - 1].copy()
    hi = ts[first].copy()
    lo[~hit] = 0.0
    hi[~hit] = 0.0
    idx = np.nonzero(hit)[0]
    lo_h, hi_h = lo[idx], hi[idx]
    sub_dirs = dirs_world[idx]

    def outside_sub(t):
        q = origin[None, :] + t[:, None] * sub_dirs
        dist = np.linalg.norm(q, axis=1)
        dist = np.maximum(dist, 1e-12)
        return dist - shape.radial(q / dist[:, None])

    for _ in range(bisect_iters):
        mid = 0.5 * (lo_h + hi_h)
        inside = outside_sub(mid) <= 0
        hi_h = np.where(inside, mid, hi_h)
        lo_h = np.where(inside, lo_h, mid)
    t_hit = 0.5 * (lo_h + hi_h)

    # camera-frame z of the hit points
    z_dir = dirs_world @ pose.rotation[2]
    z_origin = float(pose.rotation[2] @ origin + pose.translation[2])
    depth = np.zeros(h * w)
    depth[idx] = z_origin + t_hit * z_dir[idx]
    mask = np.zeros(h * w, dtype=bool)
    mask[idx] = True
    return depth.reshape(h, w).astype(np.float32), mask.reshape(h, w)


def render_depth_set(shape: RadialShape, poses: list[ViewPose]) -> DepthMapSet:
    depths, masks = [], []
    for pose in poses:
        d, m = render_depth(shape, pose)
        depths.append(d)
        masks.append(m)
    return DepthMapSet(np.stack(depths), np.stack(masks), poses)


def input_image_from_depth(depth: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Shaded 3-channel view of a depth map: nearer is brighter, void is 0.

    This fixed mapping turns the first ground-truth view into the 2D image a
    generator trains against, so a dataset file fully determines its inputs.
    """
    img = np.zeros_like(depth, dtype=np.float32)
    if mask.any():
        vals = depth[mask]
        lo, hi = float(vals.min()), float(vals.max())
        img[mask] = 0.25 + 0.75 * (hi - depth[mask]) / max(hi - lo, 1e-6)
    return np.repeat(img[None, :, :], 3, axis=0)


def emit_dataset(
    count: int,
    seed: int = 42,
    views: int = 8,
    image_size: int = 32,
    radius: float = DEFAULT_RADIUS,
) -> np.ndarray:
    """Ray-cast ``count`` random shapes into a (count, V, 2, H, W) array.

    Channel 0 is depth (0 where no hit), channel 1 the 0/1 emission mask.
    """
    if count < 1:
        raise DataError(f"need at least one sample, got {count}")
    poses = make_fixed_poses(views, radius, (image_size, image_size))
    out = np.zeros((count, views, 2, image_size, image_size), dtype=np.float32)
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(5, i)))
        shape = random_shape(rng)
        dset = render_depth_set(shape, poses)
        out[i, :, 0] = dset.depths
        out[i, :, 1] = dset.masks.astype(np.float32)
    return out
