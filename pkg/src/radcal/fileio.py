"""File schemas and canonical serialization.

All machine artifacts are JSON (or JSON-lines for labels).  Writing is
canonical: keys sorted, no whitespace, floats at 17 significant digits,
written atomically via a temp file.  Reading anything a writer produced
and re-serializing it yields byte-identical output, which the golden-file
and determinism tests rely on.

Schemas
-------
radar frame   {"timestamp_s": f, "points": [{"r_m", "az_rad", "el_rad",
              "v_mps", "rcs_dbsm"}, ...]}  (spherical variant)
              or points with {"x_m", "y_m", "z_m", "v_mps", "rcs_dbsm"}
              (cartesian variant); exactly one variant per file
corners       {"pose_id": i, "timestamp_s": f, "checkerboard":
              {"nx", "ny"}, "corners": [{"u_px", "v_px"}, ...]}
masks         {"width", "height", "instances": [{"instance_id",
              "class_id", "confidence", "rle": [start, len, ...]}]},
              run-length over row-major pixels, runs sorted, disjoint
calibration   {"rotation_row_major": [9], "axis_angle": [3],
              "translation_m": [3], "intrinsics": {...}, "mre_px",
              "rmse_px", "converged", "per_pose": [...], "config": {...}}
labels        JSON-lines {"point_index", "class_id", "instance_id",
              "provenance"}; ids are null for unlabeled points
intrinsics    {"fx", "fy", "cx", "cy", "width", "height"}
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .autolabel import InstanceMask, LabelRecord, Provenance, RadarPoint
from .checkerboard import CheckerboardSpec, CornerSet
from .geometry import CameraIntrinsics, Extrinsics, SphericalReturn, cart2sph
from .reflector import RadarFrame

__all__ = [
    "SchemaError",
    "canonical_json",
    "write_json",
    "write_text",
    "rle_encode",
    "rle_decode",
    "write_radar_frame",
    "write_radar_points",
    "write_radar_frames_stream",
    "load_radar_frame",
    "load_radar_frames",
    "load_radar_points",
    "write_corners",
    "load_corners",
    "write_masks",
    "load_masks",
    "write_calibration",
    "load_calibration",
    "write_labels",
    "load_labels",
    "write_intrinsics",
    "load_intrinsics",
]


class SchemaError(ValueError):
    """File content violates its schema."""


# ---------------------------------------------------------------------------
# canonical JSON


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact, 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {key!r}")
            items.append(json.dumps(key, ensure_ascii=True) + ":" + canonical_json(obj[key]))
        return "{" + ",".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(path: str | Path, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str | Path, obj) -> None:
    write_text(path, canonical_json(obj) + "\n")


def _load_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# run-length encoding (row-major, absolute starts)


def rle_encode(mask: np.ndarray) -> list[int]:
    """Boolean mask to a flat [start, length, ...] run list over row-major order."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if not flat.any():
        return []
    padded = np.concatenate([[False], flat, [False]])
    changes = np.flatnonzero(padded[1:] != padded[:-1])
    starts = changes[0::2]
    ends = changes[1::2]
    out = []
    for s, e in zip(starts, ends):
        out.extend([int(s), int(e - s)])
    return out


def rle_decode(runs: list[int], height: int, width: int) -> np.ndarray:
    """Inverse of rle_encode; validates ordering and bounds."""
    if len(runs) % 2 != 0:
        raise SchemaError("RLE list must hold (start, length) pairs")
    flat = np.zeros(height * width, dtype=bool)
    prev_end = 0
    for i in range(0, len(runs), 2):
        start, length = int(runs[i]), int(runs[i + 1])
        if length < 1:
            raise SchemaError(f"RLE run length must be >= 1, got {length}")
        if start < prev_end:
            raise SchemaError("RLE runs must be sorted and non-overlapping")
        if start + length > height * width:
            raise SchemaError("RLE run exceeds the mask size")
        flat[start : start + length] = True
        prev_end = start + length
    return flat.reshape(height, width)


# ---------------------------------------------------------------------------
# radar frames


def _frame_doc(frame: RadarFrame, variant: str) -> dict:
    if variant == "spherical":
        pts = [
            {
                "r_m": r.range_m,
                "az_rad": r.azimuth_rad,
                "el_rad": r.elevation_rad,
                "v_mps": r.velocity_mps,
                "rcs_dbsm": r.rcs_dbsm,
            }
            for r in frame.returns
        ]
    elif variant == "cartesian":
        from .geometry import sph2cart

        pts = []
        for r in frame.returns:
            xyz = sph2cart(r)
            pts.append(
                {
                    "x_m": float(xyz[0]),
                    "y_m": float(xyz[1]),
                    "z_m": float(xyz[2]),
                    "v_mps": r.velocity_mps,
                    "rcs_dbsm": r.rcs_dbsm,
                }
            )
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return {"timestamp_s": frame.timestamp_s, "points": pts}


def write_radar_frame(
    path: str | Path, frame: RadarFrame, variant: str = "spherical"
) -> None:
    write_json(path, _frame_doc(frame, variant))


def write_radar_points(
    path: str | Path, timestamp_s: float, points: list[RadarPoint]
) -> None:
    """Cartesian-variant frame straight from labeling-pipeline points."""
    pts = [
        {
            "x_m": float(p.position[0]),
            "y_m": float(p.position[1]),
            "z_m": float(p.position[2]),
            "v_mps": p.velocity_mps,
            "rcs_dbsm": p.rcs_dbsm,
        }
        for p in points
    ]
    write_json(path, {"timestamp_s": timestamp_s, "points": pts})


def write_radar_frames_stream(
    path: str | Path, frames: list[RadarFrame], variant: str = "spherical"
) -> None:
    """One frame per line (JSON-lines); line order is the pose order."""
    lines = [canonical_json(_frame_doc(frame, variant)) for frame in frames]
    write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def _frame_variant(points: list[dict]) -> str:
    spherical = any("r_m" in p for p in points)
    cartesian = any("x_m" in p for p in points)
    if spherical and cartesian:
        raise SchemaError("frame mixes spherical and cartesian points")
    return "cartesian" if cartesian else "spherical"


def load_radar_frames(path: str | Path) -> list[RadarFrame]:
    """Read a frame file or a JSON-lines stream of frames (.jsonl)."""
    path = Path(path)
    if path.suffix.lower() != ".jsonl":
        return [load_radar_frame(path)]
    frames = []
    with open(path) as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"bad frame stream {path}:{line_no + 1}: {exc}") from exc
            frames.append(_frame_from_doc(doc, f"{path}:{line_no + 1}"))
    return frames


def load_radar_frame(path: str | Path) -> RadarFrame:
    """Read either coordinate variant into a spherical frame."""
    return _frame_from_doc(_load_json(path), str(path))


def _frame_from_doc(doc: dict, source: str) -> RadarFrame:
    try:
        pts = doc["points"]
        timestamp = float(doc["timestamp_s"])
        returns = []
        if _frame_variant(pts) == "spherical":
            for p in pts:
                returns.append(
                    SphericalReturn(
                        float(p["r_m"]),
                        float(p["az_rad"]),
                        float(p["el_rad"]),
                        float(p["v_mps"]),
                        float(p["rcs_dbsm"]),
                    )
                )
        else:
            for p in pts:
                r, az, el = cart2sph(
                    np.array([float(p["x_m"]), float(p["y_m"]), float(p["z_m"])])
                )
                returns.append(
                    SphericalReturn(r, az, el, float(p["v_mps"]), float(p["rcs_dbsm"]))
                )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad radar frame {source}: {exc}") from exc
    return RadarFrame(timestamp_s=timestamp, returns=tuple(returns))


def load_radar_points(path: str | Path) -> tuple[float, list[RadarPoint]]:
    """Read either coordinate variant into Cartesian labeling points."""
    doc = _load_json(path)
    try:
        pts = doc["points"]
        timestamp = float(doc["timestamp_s"])
        out = []
        if _frame_variant(pts) == "cartesian":
            for p in pts:
                out.append(
                    RadarPoint(
                        np.array([float(p["x_m"]), float(p["y_m"]), float(p["z_m"])]),
                        float(p["v_mps"]),
                        float(p["rcs_dbsm"]),
                    )
                )
        else:
            from .geometry import sph2cart

            for p in pts:
                pos = sph2cart(
                    SphericalReturn(
                        float(p["r_m"]),
                        float(p["az_rad"]),
                        float(p["el_rad"]),
                        0.0,
                        0.0,
                    )
                )
                out.append(RadarPoint(pos, float(p["v_mps"]), float(p["rcs_dbsm"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad radar frame file {path}: {exc}") from exc
    return timestamp, out


# ---------------------------------------------------------------------------
# checkerboard corners


def write_corners(
    path: str | Path, pose_id: int, timestamp_s: float, corner_set: CornerSet
) -> None:
    write_json(
        path,
        {
            "pose_id": pose_id,
            "timestamp_s": timestamp_s,
            "checkerboard": {"nx": corner_set.spec.nx, "ny": corner_set.spec.ny},
            "corners": [
                {"u_px": float(u), "v_px": float(v)} for u, v in corner_set.corners
            ],
        },
    )


def load_corners(path: str | Path) -> tuple[int, float, CornerSet]:
    doc = _load_json(path)
    try:
        spec = CheckerboardSpec(int(doc["checkerboard"]["nx"]), int(doc["checkerboard"]["ny"]))
        corners = np.array(
            [[float(c["u_px"]), float(c["v_px"])] for c in doc["corners"]]
        ).reshape(-1, 2)
        pose_id = int(doc["pose_id"])
        timestamp = float(doc["timestamp_s"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad corners file {path}: {exc}") from exc
    return pose_id, timestamp, CornerSet(corners, spec)


# ---------------------------------------------------------------------------
# instance masks


def write_masks(path: str | Path, width: int, height: int, masks: list[InstanceMask]) -> None:
    instances = []
    for m in masks:
        if m.mask.shape != (height, width):
            raise ValueError(
                f"mask {m.instance_id} shape {m.mask.shape} != ({height}, {width})"
            )
        instances.append(
            {
                "instance_id": m.instance_id,
                "class_id": m.class_id,
                "confidence": m.confidence,
                "rle": rle_encode(m.mask),
            }
        )
    write_json(path, {"width": width, "height": height, "instances": instances})


def load_masks(path: str | Path) -> tuple[int, int, list[InstanceMask]]:
    doc = _load_json(path)
    try:
        width, height = int(doc["width"]), int(doc["height"])
        masks = []
        for inst in doc["instances"]:
            masks.append(
                InstanceMask(
                    mask=rle_decode(inst["rle"], height, width),
                    class_id=int(inst["class_id"]),
                    instance_id=int(inst["instance_id"]),
                    confidence=float(inst["confidence"]),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"bad mask file {path}: {exc}") from exc
    return width, height, masks


# ---------------------------------------------------------------------------
# calibration result


def write_calibration(
    path: str | Path,
    extrinsics: Extrinsics,
    intrinsics: CameraIntrinsics,
    mre_px: float,
    rmse_px: float,
    converged: bool,
    per_pose: list[dict] | None = None,
    config: dict | None = None,
) -> None:
    from .geometry import matrix_to_rotvec

    write_json(
        path,
        {
            "rotation_row_major": [float(x) for x in extrinsics.rotation.ravel()],
            "axis_angle": [float(x) for x in matrix_to_rotvec(extrinsics.rotation)],
            "translation_m": [float(x) for x in extrinsics.translation],
            "intrinsics": {
                "fx": intrinsics.fx,
                "fy": intrinsics.fy,
                "cx": intrinsics.cx,
                "cy": intrinsics.cy,
                "width": intrinsics.width,
                "height": intrinsics.height,
            },
            "mre_px": mre_px,
            "rmse_px": rmse_px,
            "converged": converged,
            "per_pose": per_pose or [],
            "config": config or {},
        },
    )


def load_calibration(path: str | Path) -> tuple[Extrinsics, CameraIntrinsics, dict]:
    """Read a calibration file; re-verifies rotation orthonormality (1e-6)."""
    doc = _load_json(path)
    try:
        rotation = np.array([float(x) for x in doc["rotation_row_major"]]).reshape(3, 3)
        translation = np.array([float(x) for x in doc["translation_m"]])
        intr = doc["intrinsics"]
        intrinsics = CameraIntrinsics(
            fx=float(intr["fx"]),
            fy=float(intr["fy"]),
            cx=float(intr["cx"]),
            cy=float(intr["cy"]),
            width=int(intr["width"]),
            height=int(intr["height"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad calibration file {path}: {exc}") from exc
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err > 1e-6:
        raise SchemaError(
            f"calibration rotation is not orthonormal (deviation {err:.3e})"
        )
    if err >= 1e-9:
        # rounded external matrix: snap to the nearest rotation; exact
        # writer output is used untouched so round-trips stay byte-identical
        u, _, vt = np.linalg.svd(rotation)
        rotation = u @ vt
        if np.linalg.det(rotation) < 0:
            u[:, -1] = -u[:, -1]
            rotation = u @ vt
    return Extrinsics(rotation, translation), intrinsics, doc


# ---------------------------------------------------------------------------
# point labels (JSON-lines)


def write_labels(path: str | Path, records: list[LabelRecord]) -> None:
    lines = []
    for rec in records:
        lines.append(
            canonical_json(
                {
                    "point_index": rec.point_index,
                    "class_id": rec.class_id,
                    "instance_id": rec.instance_id,
                    "provenance": rec.provenance.value,
                }
            )
        )
    write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_labels(path: str | Path) -> list[LabelRecord]:
    records = []
    with open(path) as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                class_id = doc["class_id"]
                instance_id = doc["instance_id"]
                label = (
                    None
                    if class_id is None or instance_id is None
                    else (int(class_id), int(instance_id))
                )
                records.append(
                    LabelRecord(
                        point_index=int(doc["point_index"]),
                        label=label,
                        provenance=Provenance(doc["provenance"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad labels file {path}:{line_no + 1}: {exc}") from exc
    indices = [r.point_index for r in records]
    if sorted(indices) != list(range(len(records))):
        raise SchemaError(f"labels file {path} does not cover point indices exactly once")
    return sorted(records, key=lambda r: r.point_index)


# ---------------------------------------------------------------------------
# intrinsics


def write_intrinsics(path: str | Path, k: CameraIntrinsics) -> None:
    write_json(
        path,
        {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy, "width": k.width, "height": k.height},
    )


def load_intrinsics(path: str | Path) -> CameraIntrinsics:
    doc = _load_json(path)
    try:
        return CameraIntrinsics(
            fx=float(doc["fx"]),
            fy=float(doc["fy"]),
            cx=float(doc["cx"]),
            cy=float(doc["cy"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad intrinsics file {path}: {exc}") from exc
