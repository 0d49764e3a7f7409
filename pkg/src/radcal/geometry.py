"""Coordinate frames, rotations, and the pinhole projection.

Conventions used throughout the package:

* 3D points are ``float64`` numpy arrays of shape ``(3,)`` (or ``(N, 3)``
  for batches), in meters.
* The radar frame is x-forward, y-left, z-up.  Azimuth is measured in the
  xy-plane from +x toward +y; elevation from the xy-plane toward +z.
  Ingested data recorded under a different convention must be converted
  upstream.
* Pixel coordinates are continuous ``(u, v)`` with sub-pixel resolution.
* Rotation vectors ("axis-angle") are radians, canonical norm in [0, pi].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BehindCamera",
    "CameraIntrinsics",
    "Extrinsics",
    "SphericalReturn",
    "Z_EPS",
    "sph2cart",
    "cart2sph",
    "rotvec_to_matrix",
    "matrix_to_rotvec",
    "canonicalize_rotvec",
    "pose_to_extrinsics",
    "extrinsics_to_pose",
    "project",
    "project_points",
]

# Depth guard for the pinhole projection: points with camera-frame depth at
# or below this are treated as behind the camera.
Z_EPS = 1e-6


class BehindCamera(ValueError):
    """Point has non-positive depth in the camera frame; projection undefined."""


@dataclass(frozen=True)
class SphericalReturn:
    """One raw 4D radar return in spherical coordinates.

    range_m >= 0, azimuth in (-pi, pi], elevation in [-pi/2, pi/2].
    """

    range_m: float
    azimuth_rad: float
    elevation_rad: float
    velocity_mps: float
    rcs_dbsm: float

    def __post_init__(self):
        if not all(
            math.isfinite(v)
            for v in (
                self.range_m,
                self.azimuth_rad,
                self.elevation_rad,
                self.velocity_mps,
                self.rcs_dbsm,
            )
        ):
            raise ValueError("radar return fields must be finite")
        if self.range_m < 0:
            raise ValueError(f"range must be >= 0, got {self.range_m}")
        if self.azimuth_rad == -math.pi:  # atan2 can emit the closed end
            object.__setattr__(self, "azimuth_rad", math.pi)
        if not -math.pi < self.azimuth_rad <= math.pi:
            raise ValueError(f"azimuth must be in (-pi, pi], got {self.azimuth_rad}")
        if abs(self.elevation_rad) > math.pi / 2:
            raise ValueError(
                f"elevation must be in [-pi/2, pi/2], got {self.elevation_rad}"
            )


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics: focal lengths, principal point, image size (pixels)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            warnings.warn(
                f"principal point ({self.cx}, {self.cy}) lies outside the "
                f"{self.width}x{self.height} image",
                stacklevel=2,
            )

    def matrix(self) -> np.ndarray:
        """3x3 intrinsic matrix."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


def _check_rotation(rotation: np.ndarray, tol: float = 1e-9) -> None:
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err >= tol:
        raise ValueError(f"rotation is not orthonormal (max deviation {err:.3e})")
    if np.linalg.det(rotation) < 0:
        raise ValueError("rotation has determinant -1 (reflection)")


@dataclass(frozen=True)
class Extrinsics:
    """Rigid SE(3) transform mapping radar-frame points into the camera frame."""

    rotation: np.ndarray  # (3, 3) orthonormal, det +1
    translation: np.ndarray  # (3,) meters

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=float)
        translation = np.asarray(self.translation, dtype=float).reshape(3)
        if rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rotation.shape}")
        _check_rotation(rotation)
        if not np.all(np.isfinite(translation)):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "Extrinsics":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> "Extrinsics":
        rt = self.rotation.T
        return Extrinsics(rt, -rt @ self.translation)

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Apply R @ p + t to one point ``(3,)`` or a batch ``(N, 3)``."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            return self.rotation @ points + self.translation
        return points @ self.rotation.T + self.translation


def sph2cart(ret: SphericalReturn) -> np.ndarray:
    """Spherical radar return to Cartesian position in the radar frame.

    x = R cos(el) cos(az), y = R cos(el) sin(az), z = R sin(el).
    """
    r, az, el = ret.range_m, ret.azimuth_rad, ret.elevation_rad
    ce = math.cos(el)
    return np.array(
        [r * ce * math.cos(az), r * ce * math.sin(az), r * math.sin(el)]
    )


def cart2sph(p: np.ndarray) -> tuple[float, float, float]:
    """Cartesian position to (range, azimuth, elevation). Inverse of sph2cart."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    r = math.sqrt(x * x + y * y + z * z)
    az = math.atan2(y, x)
    el = math.asin(z / r) if r > 0 else 0.0
    return r, az, el


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def rotvec_to_matrix(rotvec: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle, radians) to a 3x3 rotation matrix.

    Rodrigues formula with series-expanded coefficients near zero angle.
    """
    rotvec = np.asarray(rotvec, dtype=float).reshape(3)
    theta2 = float(rotvec @ rotvec)
    theta = math.sqrt(theta2)
    if theta < 1e-8:
        # sin(t)/t and (1-cos t)/t^2 by Taylor expansion
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / theta2
    k = _skew(rotvec)
    return np.eye(3) + a * k + b * (k @ k)


def matrix_to_rotvec(rotation: np.ndarray) -> np.ndarray:
    """Rotation matrix to the canonical rotation vector (norm in [0, pi]).

    Near theta = pi the axis is extracted from the symmetric part of R
    (column of largest diagonal of R + R^T - 2cos(theta) I), which stays
    well conditioned where the sin-based formula does not.
    """
    rotation = np.asarray(rotation, dtype=float)
    cos_theta = min(1.0, max(-1.0, (np.trace(rotation) - 1.0) / 2.0))
    # vee(R - R^T) / 2 = sin(theta) * axis
    s = 0.5 * np.array(
        [
            rotation[2, 1] - rotation[1, 2],
            rotation[0, 2] - rotation[2, 0],
            rotation[1, 0] - rotation[0, 1],
        ]
    )
    sin_theta = float(np.linalg.norm(s))
    # atan2 keeps full precision at both ends of [0, pi], unlike acos
    theta = math.atan2(sin_theta, cos_theta)
    if theta < 1e-6:
        # rotvec = (theta / sin theta) * s = s + O(theta^3)
        return s
    if theta < 3.0:
        return (theta / math.sin(theta)) * s
    # near pi: R + R^T - 2cos(theta) I = 2 (1 - cos(theta)) a a^T exactly
    outer = rotation + rotation.T - 2.0 * cos_theta * np.eye(3)
    k = int(np.argmax(np.diag(outer)))
    axis = outer[:, k]
    axis = axis / np.linalg.norm(axis)
    # orient along the antisymmetric part when it is informative, otherwise
    # pick the canonical sign (first nonzero component positive)
    if sin_theta > 1e-12:
        if float(axis @ s) < 0:
            axis = -axis
    else:
        for c in axis:
            if abs(c) > 1e-12:
                if c < 0:
                    axis = -axis
                break
    return theta * axis


def canonicalize_rotvec(rotvec: np.ndarray) -> np.ndarray:
    """Wrap a rotation vector to the canonical representative with norm <= pi."""
    rotvec = np.asarray(rotvec, dtype=float).reshape(3)
    theta = float(np.linalg.norm(rotvec))
    if theta <= math.pi:
        return rotvec.copy()
    wrapped = math.fmod(theta, 2.0 * math.pi)
    if wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    # wrapped in (-pi, pi]; same axis, scaled (sign flip when negative)
    return rotvec * (wrapped / theta)


def pose_to_extrinsics(pose: np.ndarray) -> Extrinsics:
    """6-vector (rx, ry, rz, tx, ty, tz) to an Extrinsics transform."""
    pose = np.asarray(pose, dtype=float).reshape(6)
    return Extrinsics(rotvec_to_matrix(pose[:3]), pose[3:].copy())


def extrinsics_to_pose(t: Extrinsics) -> np.ndarray:
    """Extrinsics to the 6-vector (rotation vector, translation)."""
    return np.concatenate([matrix_to_rotvec(t.rotation), t.translation])


def project(k: CameraIntrinsics, t: Extrinsics, point: np.ndarray) -> np.ndarray:
    """Pinhole projection of one radar-frame point. Returns pixel (u, v).

    Raises BehindCamera when the camera-frame depth is <= Z_EPS; the caller
    decides whether that is fatal (calibration) or a skip (labeling).
    """
    cam = t.transform(np.asarray(point, dtype=float))
    z = cam[2]
    if z <= Z_EPS:
        raise BehindCamera(f"depth {z:.3g} m is behind the camera plane")
    return np.array([k.fx * cam[0] / z + k.cx, k.fy * cam[1] / z + k.cy])


def project_points(
    k: CameraIntrinsics, t: Extrinsics, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized projection of an (N, 3) batch.

    Returns ``(uv, depth, in_front)`` where ``uv`` is (N, 2), ``depth`` the
    camera-frame z, and ``in_front`` flags depth > Z_EPS.  Rows of ``uv``
    with ``in_front`` False are NaN rather than an error.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    cam = t.transform(points)
    z = cam[:, 2]
    in_front = z > Z_EPS
    uv = np.full((len(points), 2), np.nan)
    zs = np.where(in_front, z, 1.0)
    uv[:, 0] = np.where(in_front, k.fx * cam[:, 0] / zs + k.cx, np.nan)
    uv[:, 1] = np.where(in_front, k.fy * cam[:, 1] / zs + k.cy, np.nan)
    return uv, z, in_front
