"""Pinhole camera poses on a viewing sphere.

World-to-camera convention: x_cam = R @ x_world + t, camera z looking at the
scene, pixel centers at (u+0.5, v+0.5) with u along width and v along height.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DataError

# fixed enumeration order for the 8-view default
_CUBE_CORNERS = [
    (-1, -1, -1), (-1, -1, 1), (-1, 1, -1), (-1, 1, 1),
    (1, -1, -1), (1, -1, 1), (1, 1, -1), (1, 1, 1),
]


@dataclass(frozen=True)
class ViewPose:
    rotation: np.ndarray  # 3x3, world -> camera
    translation: np.ndarray  # 3-vector
    focal: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3):
            raise ConfigurationError(f"rotation must be 3x3, got {r.shape}")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-6):
            raise ConfigurationError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(r), 1.0, atol=1e-6):
            raise ConfigurationError("rotation determinant is not +1")
        if self.focal <= 0:
            raise ConfigurationError(f"focal length must be positive, got {self.focal}")

    def camera_center(self) -> np.ndarray:
        """Camera position in world coordinates."""
        return -self.rotation.T @ self.translation

    def to_dict(self) -> dict:
        return {
            "rotation": np.asarray(self.rotation).tolist(),
            "translation": np.asarray(self.translation).tolist(),
            "focal": self.focal, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ViewPose":
        return cls(
            rotation=np.array(d["rotation"], dtype=np.float64),
            translation=np.array(d["translation"], dtype=np.float64),
            focal=float(d["focal"]), cx=float(d["cx"]), cy=float(d["cy"]),
            width=int(d["width"]), height=int(d["height"]),
        )


def _look_at_origin(forward: np.ndarray, radius: float, focal: float,
                    width: int, height: int) -> ViewPose:
    """Camera at -radius*forward, optical axis through the origin."""
    fwd = forward / np.linalg.norm(forward)
    up_ref = np.array([0.0, 1.0, 0.0])
    if abs(fwd @ up_ref) > 0.99:
        up_ref = np.array([1.0, 0.0, 0.0])
    right = np.cross(up_ref, fwd)
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    rot = np.stack([right, down, fwd])
    pos = -radius * fwd
    t = -rot @ pos
    return ViewPose(
        rotation=rot, translation=t, focal=focal,
        cx=width / 2.0, cy=height / 2.0, width=width, height=height,
    )


def _fibonacci_directions(n: int) -> np.ndarray:
    golden = (1 + 5**0.5) / 2
    i = np.arange(n)
    z = 1 - (2 * i + 1) / n
    r = np.sqrt(np.maximum(0.0, 1 - z * z))
    phi = 2 * np.pi * i / golden
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def make_fixed_poses(
    views: int,
    radius: float,
    image_size: tuple[int, int] = (32, 32),
    focal: float | None = None,
) -> list[ViewPose]:
    """Deterministic ring of cameras on a sphere, all looking at the origin.

    One view means a single front camera at (0,0,-radius) looking +z; eight
    views sit at the cube corners; other counts use a Fibonacci arrangement.
    The default focal length frames the unit ball with some margin.
    """
    if views < 1:
        raise DataError(f"need at least one view, got {views}")
    if radius <= 0:
        raise DataError(f"radius must be positive, got {radius}")
    w, h = image_size
    if focal is None:
        margin = max(radius**2 - 1.0, 0.25) ** 0.5
        focal = 0.8 * (w / 2.0) * margin
    if views == 1:
        dirs = np.array([[0.0, 0.0, 1.0]])
    elif views == 8:
        dirs = -np.array(_CUBE_CORNERS, dtype=np.float64) / np.sqrt(3.0)
    else:
        dirs = _fibonacci_directions(views)
    return [_look_at_origin(d, radius, focal, w, h) for d in dirs]
