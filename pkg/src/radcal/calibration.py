"""Extrinsic calibration: correspondence pairing and the LM solver.

The board center seen by the camera (pixel) and by the radar (3D point)
are paired per pose, and the radar-to-camera transform is found by
minimizing the summed squared reprojection error over a 6-parameter pose
vector (rotation vector + translation) with Levenberg-Marquardt.

The solver restarts from the identity plus the 23 remaining rotational
symmetries of the cube so no coarse mounting orientation needs a DLT-style
initial guess; the lowest-cost run wins (ties: first seed in the fixed
order).  Everything is deterministic.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    CameraIntrinsics,
    Extrinsics,
    Z_EPS,
    canonicalize_rotvec,
    extrinsics_to_pose,
    matrix_to_rotvec,
    rotvec_to_matrix,
)

logger = logging.getLogger(__name__)

__all__ = [
    "TooFewPoses",
    "DegenerateGeometry",
    "Correspondence",
    "CorrespondenceSet",
    "SolverConfig",
    "CalibrationResult",
    "DEFAULT_SYNC_TOLERANCE_S",
    "build_correspondences",
    "reprojection_residual",
    "cube_rotation_seeds",
    "solve_extrinsics",
]

# Nearest plausible pairing window for a static target (radar at 15 Hz).
DEFAULT_SYNC_TOLERANCE_S = 0.025

# Central-difference step for the solver Jacobian, per parameter.
FD_STEP = 1e-6

# Residual substituted (per component) when a candidate pose puts the radar
# point behind the camera; keeps the cost finite and repels the optimizer.
BEHIND_CAMERA_RESIDUAL = 1e4

# Relative singular-value floor below which the Jacobian at the solution is
# considered rank-deficient.
RANK_TOLERANCE = 1e-10


class TooFewPoses(ValueError):
    """Fewer than 3 valid correspondences; the 6-DOF problem is underdetermined."""


class DegenerateGeometry(RuntimeError):
    """Jacobian is rank-deficient at the solution (collinear / coincident poses)."""


@dataclass(frozen=True)
class Correspondence:
    """One pose: checkerboard center pixel paired with the radar reflector center."""

    pose_id: int
    image_center: np.ndarray  # (2,) pixels
    radar_center: np.ndarray  # (3,) meters, radar frame
    t_camera_s: float = 0.0
    t_radar_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "image_center", np.asarray(self.image_center, dtype=float).reshape(2)
        )
        object.__setattr__(
            self, "radar_center", np.asarray(self.radar_center, dtype=float).reshape(3)
        )


@dataclass(frozen=True)
class CorrespondenceSet:
    """Valid correspondences plus the poses dropped while pairing."""

    correspondences: tuple[Correspondence, ...]
    dropped_unmatched: tuple[int, ...] = ()
    dropped_sync: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.correspondences)


@dataclass
class SolverConfig:
    """LM hyperparameters.  Defaults are standard; all are overridable."""

    max_iters: int = 200
    lambda_init: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    cost_rel_tol: float = 1e-12
    step_tol: float = 1e-10
    multistart: list[np.ndarray] | None = None  # 6-vector seeds; None -> cube set

    def seeds(self) -> list[np.ndarray]:
        if self.multistart is not None:
            return [np.asarray(s, dtype=float).reshape(6) for s in self.multistart]
        return cube_rotation_seeds()


@dataclass
class CalibrationResult:
    """Solved extrinsics with per-pose residuals and summary errors."""

    extrinsics: Extrinsics
    residuals: np.ndarray  # (K, 2) observed - projected, pixels
    mre_px: float
    rmse_px: float
    iterations: int
    converged: bool
    cost: float
    seed_index: int
    cost_history: list[float] = field(default_factory=list)

    @property
    def pose_vector(self) -> np.ndarray:
        return extrinsics_to_pose(self.extrinsics)


def build_correspondences(
    camera_centers: list[tuple[int, float, np.ndarray]],
    radar_centers: list[tuple[int, float, np.ndarray]],
    sync_tolerance_s: float = DEFAULT_SYNC_TOLERANCE_S,
) -> CorrespondenceSet:
    """Pair per-pose camera and radar features by pose id.

    Each input entry is ``(pose_id, timestamp_s, feature)``.  Poses present
    on only one side are dropped; pairs whose timestamps differ by more
    than the sync tolerance are dropped and reported.  Raises TooFewPoses
    when fewer than 3 pairs remain.
    """
    cam = {pid: (t, np.asarray(v, dtype=float)) for pid, t, v in camera_centers}
    rad = {pid: (t, np.asarray(v, dtype=float)) for pid, t, v in radar_centers}
    if len(cam) != len(camera_centers) or len(rad) != len(radar_centers):
        raise ValueError("pose ids must be unique per sensor stream")

    matched = []
    sync_violations = []
    for pid in sorted(cam.keys() & rad.keys()):
        t_cam, center = cam[pid]
        t_rad, point = rad[pid]
        if abs(t_cam - t_rad) > sync_tolerance_s:
            sync_violations.append(pid)
            logger.warning(
                "pose %d dropped: camera/radar timestamps differ by %.4f s",
                pid,
                abs(t_cam - t_rad),
            )
            continue
        matched.append(
            Correspondence(
                pose_id=pid,
                image_center=center,
                radar_center=point,
                t_camera_s=t_cam,
                t_radar_s=t_rad,
            )
        )
    unmatched = sorted(cam.keys() ^ rad.keys())
    if len(matched) < 3:
        raise TooFewPoses(
            f"{len(matched)} valid poses; need at least 3 (4+ recommended)"
        )
    return CorrespondenceSet(
        correspondences=tuple(matched),
        dropped_unmatched=tuple(unmatched),
        dropped_sync=tuple(sync_violations),
    )


def reprojection_residual(
    k: CameraIntrinsics, t: Extrinsics, corr: Correspondence
) -> np.ndarray:
    """(du, dv) = observed - projected; its squared norm is the pose's error term.

    Raises BehindCamera when the radar point has non-positive depth under t.
    """
    from .geometry import project

    return corr.image_center - project(k, t, corr.radar_center)


def cube_rotation_seeds() -> list[np.ndarray]:
    """The 24 rotational symmetries of the cube as 6-vector seeds (t = 0).

    Identity first, remaining seeds in a fixed canonical order, so the
    multistart sweep is deterministic.
    """
    rotations = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            m = np.zeros((3, 3))
            for row, col in enumerate(perm):
                m[row, col] = signs[row]
            if np.linalg.det(m) > 0:
                rotations.append(m)
    seeds = []
    for m in rotations:
        pose = np.zeros(6)
        pose[:3] = matrix_to_rotvec(m)
        seeds.append(pose)
    seeds.sort(key=lambda p: tuple(np.round(p[:3], 12)))
    identity = [s for s in seeds if np.linalg.norm(s[:3]) < 1e-12]
    rest = [s for s in seeds if np.linalg.norm(s[:3]) >= 1e-12]
    return identity + rest


def _residual_vector(
    pose: np.ndarray,
    k: CameraIntrinsics,
    observed: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    """Stacked (2K,) residuals; behind-camera poses get the constant penalty."""
    rotation = rotvec_to_matrix(pose[:3])
    cam = points @ rotation.T + pose[3:]
    z = cam[:, 2]
    res = np.empty_like(observed)
    front = z > Z_EPS
    zs = np.where(front, z, 1.0)
    res[:, 0] = observed[:, 0] - (k.fx * cam[:, 0] / zs + k.cx)
    res[:, 1] = observed[:, 1] - (k.fy * cam[:, 1] / zs + k.cy)
    res[~front] = BEHIND_CAMERA_RESIDUAL
    return res.ravel()


def _jacobian(
    pose: np.ndarray,
    k: CameraIntrinsics,
    observed: np.ndarray,
    points: np.ndarray,
    step: float = FD_STEP,
) -> np.ndarray:
    """Central-difference Jacobian of the residual vector, (2K, 6)."""
    jac = np.empty((2 * len(points), 6))
    for i in range(6):
        forward = pose.copy()
        backward = pose.copy()
        forward[i] += step
        backward[i] -= step
        jac[:, i] = (
            _residual_vector(forward, k, observed, points)
            - _residual_vector(backward, k, observed, points)
        ) / (2.0 * step)
    return jac


def _run_lm(
    seed: np.ndarray,
    k: CameraIntrinsics,
    observed: np.ndarray,
    points: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, float, int, bool, list[float]]:
    """One LM descent from one seed.

    One iteration is one damped trial step: accepted steps shrink lambda,
    rejected ones grow it.  Terminates on relative cost change, step norm,
    or the iteration budget.
    """
    pose = seed.copy()
    pose[:3] = canonicalize_rotvec(pose[:3])
    cost = float(np.sum(_residual_vector(pose, k, observed, points) ** 2))
    history = [cost]
    lam = cfg.lambda_init
    converged = False
    iterations = 0
    jac = None
    for iterations in range(1, cfg.max_iters + 1):
        if jac is None:
            residual = _residual_vector(pose, k, observed, points)
            jac = _jacobian(pose, k, observed, points)
            jtj = jac.T @ jac
            gradient = jac.T @ residual
        try:
            # Gauss-Newton normal equations, damped: (J^T J + lam I) d = -J^T r
            delta = np.linalg.solve(jtj + lam * np.eye(6), -gradient)
        except np.linalg.LinAlgError:
            lam *= cfg.lambda_up
            continue
        step_norm = float(np.linalg.norm(delta))
        if step_norm <= cfg.step_tol:
            converged = True
            break
        trial = pose + delta
        trial[:3] = canonicalize_rotvec(trial[:3])
        trial_cost = float(np.sum(_residual_vector(trial, k, observed, points) ** 2))
        if trial_cost < cost:
            rel_drop = (cost - trial_cost) / max(cost, 1e-300)
            pose, cost = trial, trial_cost
            history.append(cost)
            lam /= cfg.lambda_down
            jac = None
            if rel_drop <= cfg.cost_rel_tol:
                converged = True
                break
        else:
            lam *= cfg.lambda_up
            if lam > 1e15:
                converged = True  # damping saturated: no improving direction left
                break
    return pose, cost, iterations, converged, history


def solve_extrinsics(
    correspondences: CorrespondenceSet,
    k: CameraIntrinsics,
    cfg: SolverConfig | None = None,
) -> CalibrationResult:
    """Minimize total squared reprojection error over the 6-DOF pose.

    Runs LM from every multistart seed and keeps the lowest-cost run.  The
    returned rotation is re-orthonormalized and verified; residual rows
    follow ascending pose id (so the result is bit-identical under input
    permutation).  Raises DegenerateGeometry when the Jacobian at the
    solution is rank-deficient (e.g. all radar centers coincide); a run
    that merely hits the iteration budget returns with ``converged=False``
    instead.
    """
    cfg = cfg or SolverConfig()
    if len(correspondences) < 3:
        raise TooFewPoses(f"{len(correspondences)} poses; need at least 3")
    # fixed evaluation order (ascending pose id) makes the float summation,
    # and therefore the whole solve, invariant to input permutation
    ordered = sorted(
        correspondences.correspondences, key=lambda c: c.pose_id
    )
    observed = np.array([c.image_center for c in ordered])
    points = np.array([c.radar_center for c in ordered])

    best = None
    for seed_index, seed in enumerate(cfg.seeds()):
        pose, cost, iterations, converged, history = _run_lm(
            seed, k, observed, points, cfg
        )
        if best is None or cost < best[1]:
            best = (pose, cost, iterations, converged, history, seed_index)
    pose, cost, iterations, converged, history, seed_index = best

    jac = _jacobian(pose, k, observed, points)
    singular_values = np.linalg.svd(jac, compute_uv=False)
    if singular_values[-1] <= RANK_TOLERANCE * max(singular_values[0], 1.0):
        raise DegenerateGeometry(
            "Jacobian is rank-deficient at the solution "
            f"(singular values {singular_values})"
        )

    # Rodrigues output is orthonormal to machine precision; the SVD snap
    # guards against accumulated drift before the Extrinsics invariant check.
    rotation = rotvec_to_matrix(pose[:3])
    u, _, vt = np.linalg.svd(rotation)
    rotation = u @ vt
    if np.linalg.det(rotation) < 0:
        u[:, -1] = -u[:, -1]
        rotation = u @ vt
    extrinsics = Extrinsics(rotation, pose[3:].copy())

    residuals = _residual_vector(pose, k, observed, points).reshape(-1, 2)
    norms = np.linalg.norm(residuals, axis=1)
    return CalibrationResult(
        extrinsics=extrinsics,
        residuals=residuals,
        mre_px=float(norms.mean()),
        rmse_px=float(np.sqrt((norms**2).mean())),
        iterations=iterations,
        converged=converged,
        cost=cost,
        seed_index=seed_index,
        cost_history=history,
    )
