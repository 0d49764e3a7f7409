"""Command-line interface: synth, calibrate, autolabel, eval.

Exit codes are a stable contract: 0 ok, 2 bad config/params file, 3 IO or
missing input, 4 invalid input data, 5 calibration did not converge (the
output file is still written).  Set RADCAL_LOG=debug|info|warning for
verbosity.

Radar frame files carry no pose id of their own; within a directory the
numeric suffix of ``radar_NNN.json`` is the pose id, matching the
``pose_id`` field of the corner files.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import autolabel as al
from . import calibration as cal
from . import fileio, metrics, reflector, synth
from .checkerboard import checkerboard_center
from .geometry import CameraIntrinsics, Extrinsics, project_points, rotvec_to_matrix

logger = logging.getLogger("radcal")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INVALID = 4
EXIT_NOT_CONVERGED = 5


class ConfigError(Exception):
    """Unreadable or unparsable config/params file."""


def _load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            try:
                import tomllib  # py311+
            except ModuleNotFoundError:
                import tomli as tomllib
            return tomllib.loads(raw.decode())
        return json.loads(raw.decode())
    except Exception as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _params_from_file(path: str | Path | None) -> dict:
    """Parse a params file into dataclass instances with defaults filled in."""
    doc = _load_config_file(path) if path else {}
    try:
        return {
            "filter": reflector.FilterParams(**doc.get("filter", {})),
            "cluster": reflector.ClusterParams(**doc.get("cluster", {})),
            "label": al.LabelParams(**doc.get("label", {})),
            "solver": cal.SolverConfig(**doc.get("solver", {})),
            "sync_tolerance_s": float(
                doc.get("sync_tolerance_s", cal.DEFAULT_SYNC_TOLERANCE_S)
            ),
        }
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameter file {path}: {exc}") from exc


def _indexed_files(directory: Path, prefix: str) -> list[tuple[int, Path]]:
    """(index, path) for files named <prefix>_<number>.<ext>, sorted by index."""
    pattern = re.compile(rf"^{re.escape(prefix)}_(\d+)\.\w+$")
    out = []
    for p in sorted(directory.iterdir()):
        m = pattern.match(p.name)
        if m:
            out.append((int(m.group(1)), p))
    return sorted(out)


# ---------------------------------------------------------------------------
# synth


def _extrinsics_from(doc: dict) -> Extrinsics:
    if "rotation_row_major" in doc:
        rotation = np.array(doc["rotation_row_major"], dtype=float).reshape(3, 3)
    else:
        rotation = rotvec_to_matrix(np.array(doc["axis_angle"], dtype=float))
    return Extrinsics(rotation, np.array(doc["translation_m"], dtype=float))


def _intrinsics_from(doc: dict) -> CameraIntrinsics:
    return CameraIntrinsics(
        fx=float(doc["fx"]),
        fy=float(doc["fy"]),
        cx=float(doc["cx"]),
        cy=float(doc["cy"]),
        width=int(doc["width"]),
        height=int(doc["height"]),
    )


def _scene_config_from(doc: dict, args) -> synth.SceneConfig:
    kwargs = {}
    field_names = {
        "pose_count",
        "radar_fov_az_deg",
        "radar_fov_el_deg",
        "range_min_m",
        "range_max_m",
        "board_nx",
        "board_ny",
        "board_square_m",
        "pixel_sigma_px",
        "range_sigma_m",
        "angle_sigma_rad",
        "rcs_sigma_dbsm",
        "clutter_per_frame",
        "moving_clutter_per_frame",
        "center_offset_px",
        "seed",
    }
    for name in field_names & doc.keys():
        kwargs[name] = doc[name]
    if "clutter_only_poses" in doc:
        kwargs["clutter_only_poses"] = tuple(doc["clutter_only_poses"])
    if "extrinsics" in doc:
        kwargs["extrinsics"] = _extrinsics_from(doc["extrinsics"])
    if "intrinsics" in doc:
        kwargs["intrinsics"] = _intrinsics_from(doc["intrinsics"])
    if args.poses is not None:
        kwargs["pose_count"] = args.poses
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.pixel_sigma is not None:
        kwargs["pixel_sigma_px"] = args.pixel_sigma
    if args.range_sigma is not None:
        kwargs["range_sigma_m"] = args.range_sigma
    if args.angle_sigma is not None:
        kwargs["angle_sigma_rad"] = args.angle_sigma
    if args.clutter_only:
        kwargs["clutter_only_poses"] = tuple(
            int(x) for x in args.clutter_only.split(",")
        )
    try:
        return synth.SceneConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad calibration scene config: {exc}") from exc


def _label_config_from(doc: dict, args, seed_offset: int = 0) -> synth.LabelSceneConfig:
    kwargs = {}
    field_names = {
        "object_count",
        "class_count",
        "dynamic_fraction",
        "velocity_jitter_mps",
        "rcs_jitter_dbsm",
        "clutter_count",
        "false_positive_rate",
        "false_negative_rate",
        "mask_shape",
        "mask_margin_px",
        "seed",
    }
    for name in field_names & doc.keys():
        kwargs[name] = doc[name]
    for name in ("points_per_object", "extent_m", "range_m"):
        if name in doc:
            kwargs[name] = tuple(doc[name])
    if args.objects is not None:
        kwargs["object_count"] = args.objects
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.fp_rate is not None:
        kwargs["false_positive_rate"] = args.fp_rate
    if args.fn_rate is not None:
        kwargs["false_negative_rate"] = args.fn_rate
    kwargs["seed"] = kwargs.get("seed", 0) + seed_offset
    try:
        return synth.LabelSceneConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad labeling scene config: {exc}") from exc


def _cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = _load_config_file(args.config) if args.config else {}
    if args.kind == "calibration":
        cfg = _scene_config_from(doc, args)
        scene = synth.gen_calibration_scene(cfg)
        for pose in scene.poses:
            fileio.write_corners(
                out / f"corners_{pose.pose_id:03d}.json",
                pose.pose_id,
                pose.t_camera_s,
                pose.corner_set,
            )
            fileio.write_radar_frame(
                out / f"radar_{pose.pose_id:03d}.json", pose.radar_frame
            )
        fileio.write_intrinsics(out / "intrinsics.json", cfg.intrinsics)
        fileio.write_json(out / "ground_truth.json", scene.ground_truth())
        print(
            f"calibration scene: {len(scene.poses)} poses, seed {cfg.seed} -> {out}"
        )
        return EXIT_OK

    # labeling scene(s)
    gt_dir = out / "gt_labels"
    gt_dir.mkdir(exist_ok=True)
    try:
        intrinsics = (
            _intrinsics_from(doc["intrinsics"])
            if "intrinsics" in doc
            else synth.default_intrinsics()
        )
        extrinsics = (
            _extrinsics_from(doc["extrinsics"])
            if "extrinsics" in doc
            else synth.default_extrinsics()
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad labeling scene config: {exc}") from exc
    ground_truths = []
    for frame_idx in range(args.frames):
        cfg = _label_config_from(doc, args, seed_offset=frame_idx)
        scene = synth.gen_label_scene(cfg, intrinsics, extrinsics)
        fileio.write_radar_points(
            out / f"radar_{frame_idx:03d}.json", scene.timestamp_s, list(scene.points)
        )
        fileio.write_masks(
            out / f"masks_{frame_idx:03d}.json",
            intrinsics.width,
            intrinsics.height,
            list(scene.masks),
        )
        records = [
            al.LabelRecord(
                i,
                lbl,
                al.Provenance.COARSE if lbl is not None else al.Provenance.UNLABELED,
            )
            for i, lbl in enumerate(scene.gt_labels)
        ]
        fileio.write_labels(gt_dir / f"labels_{frame_idx:03d}.jsonl", records)
        ground_truths.append(scene.ground_truth())
    fileio.write_json(
        out / "ground_truth.json",
        ground_truths[0] if len(ground_truths) == 1 else {"frames": ground_truths},
    )
    fileio.write_calibration(
        out / "calibration.json",
        extrinsics,
        intrinsics,
        mre_px=0.0,
        rmse_px=0.0,
        converged=True,
        config={"source": "synthetic ground truth"},
    )
    print(
        f"labeling scene: {args.frames} frame(s), seed {args.seed if args.seed is not None else doc.get('seed', 0)} -> {out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate


def _radar_frame_inputs(path_str: str) -> list[tuple[int, "object"]]:
    """(pose id, frame) pairs from a directory of radar_NNN.json files or a
    single .jsonl stream (pose ids are then the line indices)."""
    path = Path(path_str)
    if path.is_file() and path.suffix.lower() == ".jsonl":
        return list(enumerate(fileio.load_radar_frames(path)))
    if path.is_dir():
        return [
            (pose_id, fileio.load_radar_frame(p))
            for pose_id, p in _indexed_files(path, "radar")
        ]
    raise FileNotFoundError(f"missing radar input: {path}")


def _cmd_calibrate(args) -> int:
    params = _params_from_file(args.params)
    corners_dir = Path(args.corners)
    if not corners_dir.is_dir():
        raise FileNotFoundError(f"missing corners directory: {corners_dir}")
    intrinsics = fileio.load_intrinsics(args.intrinsics)

    camera_centers = []
    for _, path in _indexed_files(corners_dir, "corners"):
        pose_id, timestamp, corner_set = fileio.load_corners(path)
        camera_centers.append((pose_id, timestamp, checkerboard_center(corner_set)))

    radar_inputs = _radar_frame_inputs(args.frames)
    radar_centers = []
    skipped = []
    for pose_id, frame in radar_inputs:
        try:
            center = reflector.extract_reflector(
                frame, params["filter"], params["cluster"]
            )
        except reflector.ReflectorNotFound as exc:
            skipped.append(pose_id)
            logger.info("pose %d: %s", pose_id, exc)
            continue
        radar_centers.append((pose_id, frame.timestamp_s, center))
    if skipped:
        print(f"skipped {len(skipped)} pose(s) without a reflector: {skipped}")
    if not camera_centers or not radar_inputs:
        raise FileNotFoundError("no corner or radar files found")
    if len(radar_centers) < 3:
        raise cal.TooFewPoses(
            f"{len(radar_centers)} poses with a usable reflector; need at least 3"
        )

    corrs = cal.build_correspondences(
        camera_centers, radar_centers, params["sync_tolerance_s"]
    )

    holdout_report = None
    solve_set = corrs
    if args.holdout > 0:
        n_hold = int(round(len(corrs) * args.holdout))
        train = corrs.correspondences[: len(corrs) - n_hold]
        held = corrs.correspondences[len(corrs) - n_hold :]
        if len(train) < 3:
            raise cal.TooFewPoses(
                f"holdout {args.holdout} leaves {len(train)} training poses; need 3"
            )
        solve_set = cal.CorrespondenceSet(train)
        holdout_report = held

    result = cal.solve_extrinsics(solve_set, intrinsics, params["solver"])

    per_pose = [
        {
            "pose_id": c.pose_id,
            "du_px": float(r[0]),
            "dv_px": float(r[1]),
            "error_px": float(np.hypot(r[0], r[1])),
            "split": "train",
        }
        for c, r in zip(solve_set.correspondences, result.residuals)
    ]
    line = f"MRE {result.mre_px:.6g} px  RMSE {result.rmse_px:.6g} px  ({len(solve_set)} poses"
    if holdout_report:
        held_res = np.array(
            [
                cal.reprojection_residual(intrinsics, result.extrinsics, c)
                for c in holdout_report
            ]
        )
        held_norms = np.linalg.norm(held_res, axis=1)
        for c, r in zip(holdout_report, held_res):
            per_pose.append(
                {
                    "pose_id": c.pose_id,
                    "du_px": float(r[0]),
                    "dv_px": float(r[1]),
                    "error_px": float(np.hypot(r[0], r[1])),
                    "split": "holdout",
                }
            )
        line += (
            f"; holdout MRE {held_norms.mean():.6g} px RMSE "
            f"{np.sqrt((held_norms**2).mean()):.6g} px over {len(holdout_report)} poses"
        )
    line += ")"

    config_echo = {
        "solver": {
            "max_iters": params["solver"].max_iters,
            "lambda_init": params["solver"].lambda_init,
            "lambda_up": params["solver"].lambda_up,
            "lambda_down": params["solver"].lambda_down,
            "cost_rel_tol": params["solver"].cost_rel_tol,
            "step_tol": params["solver"].step_tol,
        },
        "filter": {
            "r_min": params["filter"].r_min,
            "r_max": params["filter"].r_max,
            "v_th": params["filter"].v_th,
            "rho_min": params["filter"].rho_min,
        },
        "cluster": {
            "eps": params["cluster"].eps,
            "min_pts": params["cluster"].min_pts,
        },
        "sync_tolerance_s": params["sync_tolerance_s"],
        "holdout": args.holdout,
        "iterations": result.iterations,
        "seed_index": result.seed_index,
        "dropped_unmatched": list(corrs.dropped_unmatched),
        "dropped_sync": list(corrs.dropped_sync),
        "skipped_no_reflector": skipped,
    }
    fileio.write_calibration(
        Path(args.out),
        result.extrinsics,
        intrinsics,
        mre_px=result.mre_px,
        rmse_px=result.rmse_px,
        converged=result.converged,
        per_pose=per_pose,
        config=config_echo,
    )
    print(line)
    if not result.converged:
        print("warning: solver did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# autolabel


def _label_one(
    frame_path: Path,
    mask_path: Path,
    out_path: Path,
    intrinsics,
    extrinsics,
    params,
    stage: str,
) -> int:
    _, points = fileio.load_radar_points(frame_path)
    width, height, masks = fileio.load_masks(mask_path)
    if (width, height) != (intrinsics.width, intrinsics.height):
        raise al.DimensionMismatch(
            f"{mask_path}: mask size {width}x{height} != intrinsics "
            f"{intrinsics.width}x{intrinsics.height}"
        )
    records = al.autolabel_frame(points, masks, intrinsics, extrinsics, params, stage)
    fileio.write_labels(out_path, records)
    return sum(1 for r in records if r.label is not None)


def _cmd_autolabel(args) -> int:
    params = _params_from_file(args.params)
    frames_dir = Path(args.frames)
    masks_dir = Path(args.masks)
    if not frames_dir.is_dir() or not masks_dir.is_dir():
        raise FileNotFoundError(f"missing input directory: {frames_dir} / {masks_dir}")
    extrinsics, intrinsics, _ = fileio.load_calibration(args.calibration)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    frames = dict(_indexed_files(frames_dir, "radar"))
    masks = dict(_indexed_files(masks_dir, "masks"))
    shared = sorted(frames.keys() & masks.keys())
    if not shared:
        raise FileNotFoundError("no paired radar/mask files found")

    jobs = args.jobs or os.cpu_count() or 1
    labeled = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _label_one,
                frames[i],
                masks[i],
                out / f"labels_{i:03d}.jsonl",
                intrinsics,
                extrinsics,
                params["label"],
                args.stage,
            )
            for i in shared
        ]
        for fut in futures:
            labeled += fut.result()
    print(f"labeled {len(shared)} frame(s), {labeled} points assigned -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def _records_to_labels(records) -> list:
    return [r.label for r in records]


def _cmd_eval(args) -> int:
    pred_dir = Path(args.pred)
    gt_dir = Path(args.gt)
    if not pred_dir.is_dir() or not gt_dir.is_dir():
        raise FileNotFoundError(f"missing input directory: {pred_dir} / {gt_dir}")
    pred_files = dict(_indexed_files(pred_dir, "labels"))
    gt_files = dict(_indexed_files(gt_dir, "labels"))
    if not pred_files:
        raise FileNotFoundError(f"no label files in {pred_dir}")
    shared = sorted(pred_files.keys() & gt_files.keys())
    if not shared:
        raise FileNotFoundError("no frame indices shared between pred and gt")

    per_frame = []
    all_matches = []
    correct_all = total_all = correct_fg = total_fg = 0
    for i in shared:
        pred = _records_to_labels(fileio.load_labels(pred_files[i]))
        gt = _records_to_labels(fileio.load_labels(gt_files[i]))
        if len(pred) != len(gt):
            raise metrics.LengthMismatch(
                f"frame {i}: {len(pred)} predicted vs {len(gt)} true labels"
            )
        report = metrics.label_report(pred, gt)
        per_frame.append((i, report, len(pred)))
        all_matches.extend(report.per_instance_iou)
        correct_all += report.n_correct
        total_all += report.n_points
        correct_fg += report.n_correct_foreground
        total_fg += report.n_foreground

    pa = 100.0 * correct_all / total_all if total_all else 100.0
    pa_fg = 100.0 * correct_fg / total_fg if total_fg else 100.0
    pooled_miou = (
        100.0 * float(np.mean([m.iou for m in all_matches])) if all_matches else (
            0.0 if total_fg else 100.0
        )
    )
    report_doc = {
        "pa_percent": pa,
        "pa_foreground_percent": pa_fg,
        "miou_percent": pooled_miou,
        "n_matched": len(all_matches),
        "n_frames": len(shared),
        "n_points": total_all,
        "per_frame": [
            {
                "frame": i,
                "pa_percent": r.pa_percent,
                "pa_foreground_percent": r.pa_foreground_percent,
                "miou_percent": r.miou_percent,
                "n_matched": r.n_matched,
                "n_points": n,
            }
            for i, r, n in per_frame
        ],
        "per_instance": [
            {
                "frame": i,
                "pred_class_id": m.pred[0],
                "pred_instance_id": m.pred[1],
                "gt_class_id": m.gt[0],
                "gt_instance_id": m.gt[1],
                "iou": m.iou,
            }
            for i, r, _ in per_frame
            for m in r.per_instance_iou
        ],
    }
    fileio.write_json(Path(args.out), report_doc)

    rows = [("frame", "PA%", "PA-fg%", "mIoU%", "matched", "points")]
    for i, r, n in per_frame:
        rows.append(
            (
                str(i),
                f"{r.pa_percent:.2f}",
                f"{r.pa_foreground_percent:.2f}",
                f"{r.miou_percent:.2f}",
                str(r.n_matched),
                str(n),
            )
        )
    rows.append(
        ("all", f"{pa:.2f}", f"{pa_fg:.2f}", f"{pooled_miou:.2f}", str(len(all_matches)), str(total_all))
    )
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    table_lines = [
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows
    ]
    table = "\n".join(table_lines)
    fileio.write_text(Path(args.out).with_suffix(".txt"), table + "\n")
    print(table)

    if args.overlay_frames and args.overlay_calibration:
        overlay_dir = Path(args.overlay_dir or (Path(args.out).parent / "overlay"))
        overlay_dir.mkdir(parents=True, exist_ok=True)
        extrinsics, intrinsics, _ = fileio.load_calibration(args.overlay_calibration)
        frame_files = dict(_indexed_files(Path(args.overlay_frames), "radar"))
        for i in shared:
            if i not in frame_files:
                continue
            _, points = fileio.load_radar_points(frame_files[i])
            records = fileio.load_labels(pred_files[i])
            uv, depth, in_front = project_points(
                intrinsics, extrinsics, np.array([p.position for p in points])
            )
            entries = []
            for rec, (u, v), z, ok in zip(records, uv, depth, in_front):
                entries.append(
                    {
                        "point_index": rec.point_index,
                        "u_px": float(u) if ok else None,
                        "v_px": float(v) if ok else None,
                        "depth_m": float(z),
                        "class_id": rec.class_id,
                        "instance_id": rec.instance_id,
                        "provenance": rec.provenance.value,
                    }
                )
            fileio.write_json(overlay_dir / f"overlay_{i:03d}.json", entries)
        print(f"overlay data -> {overlay_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radcal",
        description="4D radar-camera calibration and point auto-labeling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth scene")
    p.add_argument("--kind", choices=("calibration", "labeling"), required=True)
    p.add_argument("--poses", type=int, default=None, help="calibration pose count")
    p.add_argument("--objects", type=int, default=None, help="labeling object count")
    p.add_argument("--frames", type=int, default=1, help="labeling frame count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="TOML or JSON scene config")
    p.add_argument("--pixel-sigma", type=float, default=None)
    p.add_argument("--range-sigma", type=float, default=None)
    p.add_argument("--angle-sigma", type=float, default=None)
    p.add_argument("--fp-rate", type=float, default=None)
    p.add_argument("--fn-rate", type=float, default=None)
    p.add_argument("--clutter-only", default=None, help="comma-separated pose ids")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("calibrate", help="solve extrinsics from corner + radar files")
    p.add_argument("--corners", required=True, help="directory of corners_*.json")
    p.add_argument("--frames", required=True, help="directory of radar_*.json")
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--params", default=None, help="TOML or JSON parameter file")
    p.add_argument("--holdout", type=float, default=0.0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("autolabel", help="label radar frames from instance masks")
    p.add_argument("--frames", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--stage", choices=("coarse", "otpf", "full"), default="full")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_autolabel)

    p = sub.add_parser("eval", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--overlay-frames", default=None, help="radar frames for overlay")
    p.add_argument("--overlay-calibration", default=None)
    p.add_argument("--overlay-dir", default=None)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("RADCAL_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, NotADirectoryError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        fileio.SchemaError,
        cal.TooFewPoses,
        cal.DegenerateGeometry,
        al.DimensionMismatch,
        metrics.LengthMismatch,
        metrics.EmptyInput,
        ValueError,
    ) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
