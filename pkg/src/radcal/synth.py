"""Synthetic ground-truth scenes for calibration and labeling.

Everything downstream is verified against these scenes, so the generator
is built to make the clean-path guarantees hold *exactly*:

* Calibration scenes place the board center in both sensors' view, emit a
  radar blob whose apex return sits exactly at the board center with
  strictly maximal RCS, and synthesize the checkerboard corners as a
  symmetric grid in image space centered on the exact projection of that
  center.  With zero noise, extraction and the centroid reproduce the
  ground truth bit-for-bit (the paper-style assumption that the board
  centroid and reflector apex project to the same pixel holds with zero
  modeling error; ``center_offset_px`` can inject a violation on purpose).
* Labeling scenes give each object's points a constant Doppler velocity
  and RCS by default and keep their spatial spread well inside the depth
  gate, so no genuine point can be filtered; clutter is rejection-sampled
  away from masks and object neighborhoods, so nothing can be mislabeled
  or wrongly recovered.  Corruption is opt-in and constructed to be
  exactly filterable (wrong-depth points injected inside masks) or exactly
  recoverable (points displaced just outside their mask, within affinity
  reach of the cleaned cluster).

All sampling flows through one seeded generator: same config + seed means
identical scenes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autolabel import InstanceMask, RadarPoint
from .checkerboard import CheckerboardSpec, CornerSet
from .geometry import (
    CameraIntrinsics,
    Extrinsics,
    cart2sph,
    rotvec_to_matrix,
    sph2cart,
    SphericalReturn,
)
from .reflector import RadarFrame

__all__ = [
    "FovInfeasible",
    "SceneConfig",
    "LabelSceneConfig",
    "CalibrationPose",
    "CalibrationScene",
    "LabelScene",
    "default_extrinsics",
    "default_intrinsics",
    "gen_calibration_scene",
    "gen_label_scene",
]


class FovInfeasible(RuntimeError):
    """No board placement satisfies both sensor fields of view."""


def default_intrinsics() -> CameraIntrinsics:
    """1920x1080 pinhole with ~100 deg horizontal field of view."""
    return CameraIntrinsics(fx=800.0, fy=800.0, cx=960.0, cy=540.0, width=1920, height=1080)


def default_extrinsics() -> Extrinsics:
    """Radar (x-forward, y-left, z-up) to camera (x-right, y-down, z-forward),
    tilted 10 degrees about the camera y axis, with a small lever arm."""
    axes = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])
    tilt = rotvec_to_matrix(np.array([0.0, math.radians(10.0), 0.0]))
    return Extrinsics(tilt @ axes, np.array([0.1, 0.0, -0.05]))


@dataclass(frozen=True)
class SceneConfig:
    """Calibration-scene knobs; all noise defaults to zero."""

    extrinsics: Extrinsics = field(default_factory=default_extrinsics)
    intrinsics: CameraIntrinsics = field(default_factory=default_intrinsics)
    pose_count: int = 24
    radar_fov_az_deg: float = 110.0
    radar_fov_el_deg: float = 45.0
    range_min_m: float = 5.0
    range_max_m: float = 12.0
    board_nx: int = 6
    board_ny: int = 8
    board_square_m: float = 0.035
    pixel_sigma_px: float = 0.0
    range_sigma_m: float = 0.0
    angle_sigma_rad: float = 0.0
    rcs_sigma_dbsm: float = 0.0
    clutter_per_frame: int = 40
    moving_clutter_per_frame: int = 5
    clutter_only_poses: tuple[int, ...] = ()
    center_offset_px: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pose_count < 1:
            raise ValueError("pose_count must be >= 1")
        for name in ("pixel_sigma_px", "range_sigma_m", "angle_sigma_rad", "rcs_sigma_dbsm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class CalibrationPose:
    """Generated measurements plus ground truth for one pose."""

    pose_id: int
    t_camera_s: float
    t_radar_s: float
    corner_set: CornerSet
    radar_frame: RadarFrame
    gt_center_radar: np.ndarray  # (3,)
    gt_center_pixel: np.ndarray  # (2,) exact projection, pre-noise
    has_reflector: bool


@dataclass(frozen=True)
class CalibrationScene:
    config: SceneConfig
    poses: tuple[CalibrationPose, ...]

    def ground_truth(self) -> dict:
        cfg = self.config
        t = cfg.extrinsics
        from .geometry import matrix_to_rotvec

        return {
            "kind": "calibration",
            "seed": cfg.seed,
            "rotation_row_major": [float(x) for x in t.rotation.ravel()],
            "axis_angle": [float(x) for x in matrix_to_rotvec(t.rotation)],
            "translation_m": [float(x) for x in t.translation],
            "intrinsics": {
                "fx": cfg.intrinsics.fx,
                "fy": cfg.intrinsics.fy,
                "cx": cfg.intrinsics.cx,
                "cy": cfg.intrinsics.cy,
                "width": cfg.intrinsics.width,
                "height": cfg.intrinsics.height,
            },
            "poses": [
                {
                    "pose_id": p.pose_id,
                    "center_radar_m": [float(x) for x in p.gt_center_radar],
                    "center_pixel": [float(x) for x in p.gt_center_pixel],
                    "has_reflector": p.has_reflector,
                }
                for p in self.poses
            ],
        }


def _grid_offsets(count: int) -> np.ndarray:
    """Symmetric 1D grid positions (..., -1, 0, 1, ...); sums to exactly zero."""
    return np.arange(count, dtype=float) - (count - 1) / 2.0


def _place_board(
    cfg: SceneConfig, rng: np.random.Generator, margin_px: float
) -> tuple[np.ndarray, np.ndarray]:
    """Sample one board center visible to both sensors; (radar point, pixel)."""
    az_half = math.radians(cfg.radar_fov_az_deg) / 2.0 * 0.9
    el_half = math.radians(cfg.radar_fov_el_deg) / 2.0 * 0.9
    k = cfg.intrinsics
    for _ in range(1000):
        r = rng.uniform(cfg.range_min_m, cfg.range_max_m)
        az = rng.uniform(-az_half, az_half)
        el = rng.uniform(-el_half, el_half)
        center = sph2cart(SphericalReturn(r, az, el, 0.0, 0.0))
        cam = cfg.extrinsics.transform(center)
        if cam[2] <= 0.5:
            continue
        u = k.fx * cam[0] / cam[2] + k.cx
        v = k.fy * cam[1] / cam[2] + k.cy
        if margin_px <= u <= k.width - margin_px and margin_px <= v <= k.height - margin_px:
            return center, np.array([u, v])
    raise FovInfeasible(
        "no board placement satisfies both fields of view; check the "
        "extrinsics / FOV / range configuration"
    )


def _synth_corners(
    cfg: SceneConfig, rng: np.random.Generator, center_px: np.ndarray, range_m: float
) -> np.ndarray:
    """Corner grid in image space, exactly symmetric about the center pixel."""
    k = cfg.intrinsics
    pitch_u = k.fx * cfg.board_square_m / range_m
    pitch_v = k.fy * cfg.board_square_m / range_m
    angle = rng.uniform(-0.5, 0.5)
    scale_u = pitch_u * rng.uniform(0.9, 1.1)
    scale_v = pitch_v * rng.uniform(0.9, 1.1)
    gu = _grid_offsets(cfg.board_nx - 1) * scale_u
    gv = _grid_offsets(cfg.board_ny - 1) * scale_v
    uu, vv = np.meshgrid(gu, gv, indexing="xy")
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    du = cos_a * uu - sin_a * vv
    dv = sin_a * uu + cos_a * vv
    corners = np.column_stack([du.ravel(), dv.ravel()])
    corners += center_px + np.array([cfg.center_offset_px, 0.0])
    if cfg.pixel_sigma_px > 0:
        corners = corners + rng.normal(0.0, cfg.pixel_sigma_px, corners.shape)
    return corners


def _reflector_blob(
    cfg: SceneConfig, rng: np.random.Generator, center: np.ndarray
) -> list[SphericalReturn]:
    """Apex return exactly at the center with strictly maximal RCS, plus
    4-8 scatter returns within a few centimeters."""
    r, az, el = cart2sph(center)
    returns = [
        SphericalReturn(r, az, el, float(rng.uniform(-0.1, 0.1)), float(rng.uniform(37.0, 40.0)))
    ]
    n_scatter = int(rng.integers(4, 9))
    offsets = rng.normal(0.0, 0.03, (n_scatter, 3))
    for off in offsets:
        sr, saz, sel = cart2sph(center + off)
        returns.append(
            SphericalReturn(
                sr, saz, sel, float(rng.uniform(-0.1, 0.1)), float(rng.uniform(30.0, 35.0))
            )
        )
    return returns


def _clutter_returns(
    cfg: SceneConfig, rng: np.random.Generator
) -> list[SphericalReturn]:
    """Low-RCS clutter everywhere plus a few fast movers that pass the RCS gate."""
    az_half = math.radians(cfg.radar_fov_az_deg) / 2.0
    el_half = math.radians(cfg.radar_fov_el_deg) / 2.0
    out = []
    for _ in range(cfg.clutter_per_frame):
        out.append(
            SphericalReturn(
                float(rng.uniform(0.5, 20.0)),
                float(rng.uniform(-az_half, az_half)),
                float(rng.uniform(-el_half, el_half)),
                float(rng.uniform(-3.0, 3.0)),
                float(rng.uniform(-5.0, 9.5)),
            )
        )
    for _ in range(cfg.moving_clutter_per_frame):
        out.append(
            SphericalReturn(
                float(rng.uniform(3.5, 14.0)),
                float(rng.uniform(-az_half, az_half)),
                float(rng.uniform(-el_half, el_half)),
                float(rng.choice([-1.0, 1.0]) * rng.uniform(0.8, 5.0)),
                float(rng.uniform(10.5, 25.0)),
            )
        )
    return out


def _perturb_returns(
    cfg: SceneConfig, rng: np.random.Generator, returns: list[SphericalReturn]
) -> list[SphericalReturn]:
    if cfg.range_sigma_m == 0 and cfg.angle_sigma_rad == 0 and cfg.rcs_sigma_dbsm == 0:
        return returns
    out = []
    for ret in returns:
        r = max(0.0, ret.range_m + float(rng.normal(0.0, cfg.range_sigma_m)))
        az = ret.azimuth_rad + float(rng.normal(0.0, cfg.angle_sigma_rad))
        el = ret.elevation_rad + float(rng.normal(0.0, cfg.angle_sigma_rad))
        el = min(math.pi / 2, max(-math.pi / 2, el))
        rcs = ret.rcs_dbsm + float(rng.normal(0.0, cfg.rcs_sigma_dbsm))
        out.append(SphericalReturn(r, az, el, ret.velocity_mps, rcs))
    return out


def gen_calibration_scene(cfg: SceneConfig | None = None) -> CalibrationScene:
    """Generate per-pose corner sets and radar frames with known extrinsics."""
    cfg = cfg or SceneConfig()
    rng = np.random.default_rng(cfg.seed)
    spec = CheckerboardSpec(cfg.board_nx, cfg.board_ny)
    poses = []
    for pose_id in range(cfg.pose_count):
        center, center_px = _place_board(cfg, rng, margin_px=150.0)
        corners = _synth_corners(cfg, rng, center_px, float(np.linalg.norm(center)))
        has_reflector = pose_id not in cfg.clutter_only_poses
        returns: list[SphericalReturn] = []
        if has_reflector:
            returns.extend(_reflector_blob(cfg, rng, center))
        returns.extend(_clutter_returns(cfg, rng))
        returns = _perturb_returns(cfg, rng, returns)
        t_cam = float(pose_id)
        t_radar = t_cam + float(rng.uniform(-0.01, 0.01))
        poses.append(
            CalibrationPose(
                pose_id=pose_id,
                t_camera_s=t_cam,
                t_radar_s=t_radar,
                corner_set=CornerSet(corners, spec),
                radar_frame=RadarFrame(timestamp_s=t_radar, returns=tuple(returns)),
                gt_center_radar=center,
                gt_center_pixel=center_px,
                has_reflector=has_reflector,
            )
        )
    return CalibrationScene(config=cfg, poses=tuple(poses))


# ---------------------------------------------------------------------------
# Labeling scenes


@dataclass(frozen=True)
class LabelSceneConfig:
    """Labeling-scene knobs; corruption rates default to zero (clean scene)."""

    object_count: int = 5
    points_per_object: tuple[int, int] = (8, 16)
    extent_m: tuple[float, float] = (0.15, 0.3)
    range_m: tuple[float, float] = (6.0, 20.0)
    class_count: int = 3
    dynamic_fraction: float = 0.5
    velocity_jitter_mps: float = 0.0
    rcs_jitter_dbsm: float = 0.0
    clutter_count: int = 30
    false_positive_rate: float = 0.0
    false_negative_rate: float = 0.0
    mask_shape: str = "rect"  # "rect" or "hull"
    mask_margin_px: int = 4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.false_positive_rate <= 1.0:
            raise ValueError("false_positive_rate must be in [0, 1]")
        if not 0.0 <= self.false_negative_rate <= 1.0:
            raise ValueError("false_negative_rate must be in [0, 1]")
        if self.mask_shape not in ("rect", "hull"):
            raise ValueError(f"unknown mask_shape {self.mask_shape!r}")
        if self.object_count < 1:
            raise ValueError("object_count must be >= 1")


@dataclass(frozen=True)
class SceneObject:
    """Ground truth for one generated object."""

    instance_id: int
    class_id: int
    confidence: float
    centroid: np.ndarray  # (3,) radar frame
    velocity_mps: float
    rcs_dbsm: float
    point_indices: tuple[int, ...]  # into the scene point list (incl. displaced)


@dataclass(frozen=True)
class LabelScene:
    config: LabelSceneConfig
    points: tuple[RadarPoint, ...]
    masks: tuple[InstanceMask, ...]
    gt_labels: tuple  # per point: (class_id, instance_id) or None
    objects: tuple[SceneObject, ...]
    timestamp_s: float = 0.0

    def ground_truth(self) -> dict:
        return {
            "kind": "labeling",
            "seed": self.config.seed,
            "objects": [
                {
                    "instance_id": o.instance_id,
                    "class_id": o.class_id,
                    "confidence": o.confidence,
                    "centroid_m": [float(x) for x in o.centroid],
                    "velocity_mps": o.velocity_mps,
                    "rcs_dbsm": o.rcs_dbsm,
                    "point_indices": list(o.point_indices),
                }
                for o in self.objects
            ],
            "labels": [
                None if lbl is None else {"class_id": lbl[0], "instance_id": lbl[1]}
                for lbl in self.gt_labels
            ],
        }


def _mask_bbox(ui: np.ndarray, vi: np.ndarray, margin: int, k: CameraIntrinsics):
    """Inclusive 1-based pixel bbox of lookup pixels, expanded by the margin."""
    u_lo = max(1, int(ui.min()) - margin)
    u_hi = min(k.width, int(ui.max()) + margin)
    v_lo = max(1, int(vi.min()) - margin)
    v_hi = min(k.height, int(vi.max()) + margin)
    return u_lo, u_hi, v_lo, v_hi


def _render_mask(
    shape: str,
    uv: np.ndarray,
    bbox: tuple[int, int, int, int],
    margin: int,
    k: CameraIntrinsics,
) -> np.ndarray:
    """Boolean H x W mask covering the object silhouette."""
    u_lo, u_hi, v_lo, v_hi = bbox
    mask = np.zeros((k.height, k.width), dtype=bool)
    if shape == "rect" or len(uv) < 3:
        mask[v_lo - 1 : v_hi, u_lo - 1 : u_hi] = True
        return mask
    # convex hull of the projected points, dilated by the margin
    try:
        from scipy.spatial import ConvexHull, QhullError

        hull = ConvexHull(uv)
    except QhullError:
        mask[v_lo - 1 : v_hi, u_lo - 1 : u_hi] = True
        return mask
    # half-plane test over the bbox window; equations are a @ x + b <= 0 inside
    cols = np.arange(u_lo, u_hi + 1, dtype=float)
    rows = np.arange(v_lo, v_hi + 1, dtype=float)
    uu, vv = np.meshgrid(cols, rows, indexing="xy")
    inside = np.ones(uu.shape, dtype=bool)
    for a, b, c in hull.equations:
        inside &= a * uu + b * vv + c <= margin
    mask[v_lo - 1 : v_hi, u_lo - 1 : u_hi] = inside
    return mask


def _project_lookup(
    k: CameraIntrinsics, t: Extrinsics, positions: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(uv, lookup u, lookup v, depth) for an (N, 3) batch; all must be in front."""
    from .geometry import project_points

    uv, depth, in_front = project_points(k, t, positions)
    if not np.all(in_front):
        raise ValueError("object points must project in front of the camera")
    ui = np.floor(uv[:, 0] + 0.5).astype(int)
    vi = np.floor(uv[:, 1] + 0.5).astype(int)
    return uv, ui, vi, depth


def _bboxes_disjoint(a, b, gap: int) -> bool:
    au_lo, au_hi, av_lo, av_hi = a
    bu_lo, bu_hi, bv_lo, bv_hi = b
    return (
        au_hi + gap < bu_lo
        or bu_hi + gap < au_lo
        or av_hi + gap < bv_lo
        or bv_hi + gap < av_lo
    )


def gen_label_scene(
    cfg: LabelSceneConfig | None = None,
    k: CameraIntrinsics | None = None,
    t: Extrinsics | None = None,
) -> LabelScene:
    """Generate one labeling frame: points, instance masks, true labels."""
    cfg = cfg or LabelSceneConfig()
    k = k or default_intrinsics()
    t = t or default_extrinsics()
    rng = np.random.default_rng(cfg.seed)
    t_inv = t.inverse()

    min_separation_m = 5.0  # > default r_search with margin
    bbox_gap_px = 24
    image_margin_px = 260.0

    objects: list[dict] = []
    for obj_idx in range(cfg.object_count):
        placed = False
        for _ in range(2000):
            r = rng.uniform(*cfg.range_m)
            az = rng.uniform(-math.radians(25.0), math.radians(25.0))
            el = rng.uniform(-math.radians(8.0), math.radians(8.0))
            centroid = sph2cart(SphericalReturn(r, az, el, 0.0, 0.0))
            if any(
                np.linalg.norm(centroid - o["centroid"]) < min_separation_m
                for o in objects
            ):
                continue
            n_pts = int(rng.integers(cfg.points_per_object[0], cfg.points_per_object[1] + 1))
            extent = rng.uniform(*cfg.extent_m)
            offsets = rng.normal(0.0, extent / 2.0, (n_pts, 3))
            norms = np.linalg.norm(offsets, axis=1)
            over = norms > extent
            offsets[over] *= (extent / norms[over])[:, None]
            positions = centroid + offsets

            cam = t.transform(positions)
            if np.any(cam[:, 2] <= 0.5):
                continue
            uv = np.column_stack(
                [
                    k.fx * cam[:, 0] / cam[:, 2] + k.cx,
                    k.fy * cam[:, 1] / cam[:, 2] + k.cy,
                ]
            )
            if not (
                np.all(uv[:, 0] >= image_margin_px)
                and np.all(uv[:, 0] <= k.width - image_margin_px)
                and np.all(uv[:, 1] >= image_margin_px * 0.6)
                and np.all(uv[:, 1] <= k.height - image_margin_px * 0.6)
            ):
                continue
            ui = np.floor(uv[:, 0] + 0.5).astype(int)
            vi = np.floor(uv[:, 1] + 0.5).astype(int)
            k_fn = int(round(cfg.false_negative_rate * n_pts))
            n_kept = n_pts - k_fn
            if n_kept < 3:
                continue
            bbox = _mask_bbox(ui[:n_kept], vi[:n_kept], cfg.mask_margin_px, k)
            if any(not _bboxes_disjoint(bbox, o["bbox"], bbox_gap_px) for o in objects):
                continue

            # displace the last k_fn points just outside the mask.  The
            # refined cluster after filtering is exactly the kept points, so
            # bounding the distance to their mean (with velocity and RCS
            # matched exactly) guarantees affinity above the default
            # threshold: exp(-0.78^2 / (2 * 0.8^2)) ~ 0.62 >= 0.6.
            displaced_ok = True
            kept_mean = positions[:n_kept].mean(axis=0)
            centroid_cam = t.transform(centroid)
            z_obj = float(centroid_cam[2])
            for j in range(n_kept, n_pts):
                side = 1 if rng.uniform() < 0.5 else -1
                exit_u = bbox[1] + 3 if side > 0 else bbox[0] - 3
                target_v = 0.5 * (bbox[2] + bbox[3])
                p_cam = np.array(
                    [
                        (exit_u - k.cx) / k.fx * z_obj,
                        (target_v - k.cy) / k.fy * z_obj,
                        z_obj,
                    ]
                )
                p_radar = t_inv.transform(p_cam)
                if np.linalg.norm(p_radar - kept_mean) > 0.78:
                    displaced_ok = False
                    break
                positions[j] = p_radar
            if not displaced_ok:
                continue

            if cfg.mask_shape == "hull":
                mask = _render_mask("hull", uv[:n_kept], bbox, cfg.mask_margin_px, k)
            else:
                mask = _render_mask("rect", uv[:n_kept], bbox, cfg.mask_margin_px, k)

            is_dynamic = rng.uniform() < cfg.dynamic_fraction
            if is_dynamic:
                v_obj = float(rng.choice([-1.0, 1.0]) * rng.uniform(1.0, 8.0))
            else:
                v_obj = float(rng.uniform(-0.25, 0.25))
            rcs_obj = float(rng.uniform(0.0, 25.0))
            objects.append(
                {
                    "instance_id": obj_idx + 1,
                    "class_id": int(rng.integers(1, cfg.class_count + 1)),
                    "confidence": float(rng.uniform(0.7, 0.99)),
                    "centroid": centroid,
                    "positions": positions,
                    "n_kept": n_kept,
                    "bbox": bbox,
                    "mask": mask,
                    "velocity": v_obj,
                    "rcs": rcs_obj,
                    "z_obj": z_obj,
                }
            )
            placed = True
            break
        if not placed:
            raise FovInfeasible(
                f"could not place object {obj_idx} after 2000 attempts"
            )

    points: list[RadarPoint] = []
    gt_labels: list = []
    scene_objects: list[SceneObject] = []
    for o in objects:
        idx_start = len(points)
        n = len(o["positions"])
        for j in range(n):
            v = o["velocity"] + (
                float(rng.normal(0.0, cfg.velocity_jitter_mps))
                if cfg.velocity_jitter_mps > 0
                else 0.0
            )
            rho = o["rcs"] + (
                float(rng.normal(0.0, cfg.rcs_jitter_dbsm))
                if cfg.rcs_jitter_dbsm > 0
                else 0.0
            )
            points.append(RadarPoint(o["positions"][j], v, rho))
            gt_labels.append((o["class_id"], o["instance_id"]))
        scene_objects.append(
            SceneObject(
                instance_id=o["instance_id"],
                class_id=o["class_id"],
                confidence=o["confidence"],
                centroid=o["centroid"],
                velocity_mps=o["velocity"],
                rcs_dbsm=o["rcs"],
                point_indices=tuple(range(idx_start, idx_start + n)),
            )
        )

    # false-positive bait: inside the mask in the image, far off in depth,
    # so the depth gate is guaranteed to remove what coarse association added
    centroids = np.array([o["centroid"] for o in objects])
    for o in objects:
        k_fp = int(round(cfg.false_positive_rate * len(o["positions"])))
        flat = np.flatnonzero(o["mask"]) if k_fp else None
        for _ in range(k_fp):
            for _ in range(200):
                pick = int(rng.integers(0, len(flat)))
                row, col = divmod(flat[pick], k.width)
                delta = float(rng.uniform(4.0, 8.0))
                sign = 1.0 if (o["z_obj"] - delta < 2.0 or rng.uniform() < 0.5) else -1.0
                z_bait = o["z_obj"] + sign * delta
                p_cam = np.array(
                    [
                        (col + 1 - k.cx) / k.fx * z_bait,
                        (row + 1 - k.cy) / k.fy * z_bait,
                        z_bait,
                    ]
                )
                p_radar = t_inv.transform(p_cam)
                if np.min(np.linalg.norm(centroids - p_radar, axis=1)) > 2.5:
                    points.append(
                        RadarPoint(
                            p_radar,
                            float(rng.uniform(-10.0, 10.0)),
                            float(rng.uniform(-5.0, 30.0)),
                        )
                    )
                    gt_labels.append(None)
                    break

    # background clutter: never inside a mask, never near an object
    masks_any = np.zeros((k.height, k.width), dtype=bool)
    for o in objects:
        masks_any |= o["mask"]
    az_half = math.radians(40.0)
    el_half = math.radians(10.0)
    for _ in range(cfg.clutter_count):
        for _ in range(500):
            pos = sph2cart(
                SphericalReturn(
                    float(rng.uniform(4.0, 35.0)),
                    float(rng.uniform(-az_half, az_half)),
                    float(rng.uniform(-el_half, el_half)),
                    0.0,
                    0.0,
                )
            )
            if np.min(np.linalg.norm(centroids - pos, axis=1)) < 2.5:
                continue
            cam = t.transform(pos)
            if cam[2] > 1e-6:
                u = k.fx * cam[0] / cam[2] + k.cx
                v = k.fy * cam[1] / cam[2] + k.cy
                ui = int(math.floor(u + 0.5))
                vi = int(math.floor(v + 0.5))
                if 1 <= ui <= k.width and 1 <= vi <= k.height:
                    # stay clear of mask edges by a couple of pixels
                    r0, r1 = max(0, vi - 3), min(k.height, vi + 2)
                    c0, c1 = max(0, ui - 3), min(k.width, ui + 2)
                    if masks_any[r0:r1, c0:c1].any():
                        continue
            points.append(
                RadarPoint(
                    pos,
                    float(rng.uniform(-10.0, 10.0)),
                    float(rng.uniform(-5.0, 30.0)),
                )
            )
            gt_labels.append(None)
            break

    masks = tuple(
        InstanceMask(
            mask=o["mask"],
            class_id=o["class_id"],
            instance_id=o["instance_id"],
            confidence=o["confidence"],
        )
        for o in objects
    )
    return LabelScene(
        config=cfg,
        points=tuple(points),
        masks=masks,
        gt_labels=tuple(gt_labels),
        objects=tuple(scene_objects),
    )
