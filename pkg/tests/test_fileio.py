import json

import numpy as np
import pytest

from radcal.autolabel import InstanceMask, LabelRecord, Provenance, RadarPoint
from radcal.checkerboard import CheckerboardSpec, CornerSet
from radcal.fileio import (
    SchemaError,
    canonical_json,
    load_calibration,
    load_corners,
    load_intrinsics,
    load_labels,
    load_masks,
    load_radar_frame,
    load_radar_points,
    rle_decode,
    rle_encode,
    write_calibration,
    write_corners,
    write_intrinsics,
    write_json,
    write_labels,
    write_masks,
    write_radar_frame,
    write_radar_points,
)
from radcal.geometry import SphericalReturn, sph2cart
from radcal.reflector import RadarFrame
from radcal.synth import default_extrinsics, default_intrinsics


class TestCanonicalJson:
    def test_sorted_compact(self):
        assert canonical_json({"b": 1, "a": [True, None]}) == '{"a":[true,null],"b":1}'

    def test_float_17_digits(self):
        assert canonical_json(0.1) == "0.10000000000000001"
        assert canonical_json(1.0) == "1"

    def test_reparse_reserialize_identical(self):
        doc = {"x": [0.1, 1 / 3, 2.5e-17, -4041.25], "n": 7, "s": "hi"}
        text = canonical_json(doc)
        again = canonical_json(json.loads(text))
        assert again == text

    def test_numpy_scalars_and_arrays(self):
        text = canonical_json({"a": np.float64(0.5), "b": np.int32(3), "c": np.arange(2)})
        assert text == '{"a":0.5,"b":3,"c":[0,1]}'

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            canonical_json(float("nan"))

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            canonical_json(object())


class TestRle:
    def test_round_trip_random(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            mask = rng.uniform(size=(13, 17)) < 0.3
            runs = rle_encode(mask)
            assert np.array_equal(rle_decode(runs, 13, 17), mask)

    def test_empty_mask(self):
        assert rle_encode(np.zeros((4, 4), dtype=bool)) == []
        assert not rle_decode([], 4, 4).any()

    def test_full_mask(self):
        mask = np.ones((3, 5), dtype=bool)
        assert rle_encode(mask) == [0, 15]

    def test_overlapping_runs_rejected(self):
        with pytest.raises(SchemaError):
            rle_decode([0, 5, 3, 2], 4, 4)

    def test_out_of_bounds_rejected(self):
        with pytest.raises(SchemaError):
            rle_decode([14, 5], 4, 4)

    def test_odd_length_rejected(self):
        with pytest.raises(SchemaError):
            rle_decode([0, 5, 7], 4, 4)

    def test_zero_length_run_rejected(self):
        with pytest.raises(SchemaError):
            rle_decode([0, 0], 4, 4)


class TestRadarFrameFiles:
    def frame(self):
        returns = (
            SphericalReturn(8.0, 0.1, -0.05, 0.2, 31.5),
            SphericalReturn(12.5, -0.4, 0.02, -1.0, 7.25),
        )
        return RadarFrame(timestamp_s=3.5, returns=returns)

    def test_spherical_round_trip(self, tmp_path):
        path = tmp_path / "radar_000.json"
        write_radar_frame(path, self.frame(), variant="spherical")
        back = load_radar_frame(path)
        assert back == self.frame()

    def test_cartesian_round_trip_positions(self, tmp_path):
        path = tmp_path / "radar_000.json"
        write_radar_frame(path, self.frame(), variant="cartesian")
        _, points = load_radar_points(path)
        for ret, point in zip(self.frame().returns, points):
            assert np.allclose(point.position, sph2cart(ret), atol=1e-12)
            assert point.velocity_mps == ret.velocity_mps

    def test_byte_identical_reserialization(self, tmp_path):
        path_a = tmp_path / "a.json"
        path_b = tmp_path / "b.json"
        write_radar_frame(path_a, self.frame())
        back = load_radar_frame(path_a)
        write_radar_frame(path_b, back)
        assert path_a.read_bytes() == path_b.read_bytes()

    def test_mixed_variant_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "timestamp_s": 0.0,
                    "points": [
                        {"r_m": 1, "az_rad": 0, "el_rad": 0, "v_mps": 0, "rcs_dbsm": 0},
                        {"x_m": 1, "y_m": 0, "z_m": 0, "v_mps": 0, "rcs_dbsm": 0},
                    ],
                }
            )
        )
        with pytest.raises(SchemaError):
            load_radar_frame(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"timestamp_s": 0.0, "points": [{"r_m": 1}]}))
        with pytest.raises(SchemaError):
            load_radar_frame(path)

    def test_jsonl_stream_round_trip(self, tmp_path):
        from radcal.fileio import load_radar_frames, write_radar_frames_stream

        frames = [self.frame(), RadarFrame(4.5, (SphericalReturn(3.0, 0.0, 0.0, 0.0, 12.0),))]
        path = tmp_path / "frames.jsonl"
        write_radar_frames_stream(path, frames)
        back = load_radar_frames(path)
        assert back == frames

    def test_single_file_via_stream_loader(self, tmp_path):
        from radcal.fileio import load_radar_frames

        path = tmp_path / "radar_000.json"
        write_radar_frame(path, self.frame())
        assert load_radar_frames(path) == [self.frame()]

    def test_radar_points_round_trip(self, tmp_path):
        points = [
            RadarPoint(np.array([1.0, 2.0, 3.0]), 0.5, 12.0),
            RadarPoint(np.array([-4.0, 0.25, 1.0]), -2.0, -3.5),
        ]
        path = tmp_path / "radar_000.json"
        write_radar_points(path, 1.25, points)
        timestamp, back = load_radar_points(path)
        assert timestamp == 1.25
        for a, b in zip(points, back):
            assert np.array_equal(a.position, b.position)
            assert a.velocity_mps == b.velocity_mps
            assert a.rcs_dbsm == b.rcs_dbsm


class TestCornerFiles:
    def test_round_trip(self, tmp_path):
        corners = np.array([[10.5, 20.25], [30.0, 40.125], [50.0, 60.0]])
        cs = CornerSet(corners, CheckerboardSpec(2, 4))
        path = tmp_path / "corners_000.json"
        write_corners(path, 4, 2.5, cs)
        pose_id, timestamp, back = load_corners(path)
        assert pose_id == 4 and timestamp == 2.5
        assert np.array_equal(back.corners, corners)
        assert back.spec == cs.spec

    def test_byte_identical_reserialization(self, tmp_path):
        rng = np.random.default_rng(1)
        cs = CornerSet(rng.uniform(0, 1000, (35, 2)), CheckerboardSpec(6, 8))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_corners(a, 0, 0.0, cs)
        pid, ts, back = load_corners(a)
        write_corners(b, pid, ts, back)
        assert a.read_bytes() == b.read_bytes()


class TestMaskFiles:
    def masks(self):
        rng = np.random.default_rng(2)
        out = []
        for i in (1, 2):
            mask = np.zeros((10, 12), dtype=bool)
            mask[rng.uniform(size=(10, 12)) < 0.2] = True
            out.append(InstanceMask(mask, class_id=i, instance_id=i, confidence=0.5 + 0.1 * i))
        return out

    def test_round_trip(self, tmp_path):
        masks = self.masks()
        path = tmp_path / "masks_000.json"
        write_masks(path, 12, 10, masks)
        width, height, back = load_masks(path)
        assert (width, height) == (12, 10)
        for a, b in zip(masks, back):
            assert np.array_equal(a.mask, b.mask)
            assert (a.class_id, a.instance_id, a.confidence) == (
                b.class_id,
                b.instance_id,
                b.confidence,
            )

    def test_wrong_shape_rejected_on_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_masks(tmp_path / "m.json", 5, 5, self.masks())

    def test_byte_identical_reserialization(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_masks(a, 12, 10, self.masks())
        width, height, back = load_masks(a)
        write_masks(b, width, height, back)
        assert a.read_bytes() == b.read_bytes()


class TestCalibrationFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "calibration.json"
        t = default_extrinsics()
        k = default_intrinsics()
        write_calibration(path, t, k, mre_px=1.25, rmse_px=2.5, converged=True)
        t2, k2, doc = load_calibration(path)
        assert np.allclose(t2.rotation, t.rotation, atol=1e-15)
        assert np.allclose(t2.translation, t.translation)
        assert k2 == k
        assert doc["mre_px"] == 1.25

    def test_byte_identical_reserialization(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_calibration(a, default_extrinsics(), default_intrinsics(), 1.5, 2.25, True)
        t, k, doc = load_calibration(a)
        write_calibration(
            b, t, k, doc["mre_px"], doc["rmse_px"], doc["converged"],
            per_pose=doc["per_pose"], config=doc["config"],
        )
        assert a.read_bytes() == b.read_bytes()

    def test_orthonormality_reverified(self, tmp_path):
        path = tmp_path / "calibration.json"
        t = default_extrinsics()
        write_calibration(path, t, default_intrinsics(), 0.0, 0.0, True)
        doc = json.loads(path.read_text())
        doc["rotation_row_major"][0] = 2.0
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            load_calibration(path)

    def test_rounded_rotation_snapped_within_tolerance(self, tmp_path):
        path = tmp_path / "calibration.json"
        t = default_extrinsics()
        write_calibration(path, t, default_intrinsics(), 0.0, 0.0, True)
        doc = json.loads(path.read_text())
        doc["rotation_row_major"] = [round(x, 7) for x in doc["rotation_row_major"]]
        path.write_text(json.dumps(doc))
        t2, _, _ = load_calibration(path)  # accepted: deviation ~1e-7 < 1e-6
        assert np.abs(t2.rotation.T @ t2.rotation - np.eye(3)).max() < 1e-9
        assert np.allclose(t2.rotation, t.rotation, atol=1e-6)


class TestLabelFiles:
    def records(self):
        return [
            LabelRecord(0, (1, 2), Provenance.COARSE),
            LabelRecord(1, None, Provenance.FILTERED_OUT),
            LabelRecord(2, (2, 3), Provenance.RECOVERED),
            LabelRecord(3, None, Provenance.UNLABELED),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "labels_000.jsonl"
        write_labels(path, self.records())
        back = load_labels(path)
        assert back == self.records()

    def test_byte_identical_reserialization(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_labels(a, self.records())
        write_labels(b, load_labels(a))
        assert a.read_bytes() == b.read_bytes()

    def test_incomplete_coverage_rejected(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        write_labels(path, [LabelRecord(0, None, Provenance.UNLABELED),
                            LabelRecord(2, None, Provenance.UNLABELED)])
        with pytest.raises(SchemaError):
            load_labels(path)


class TestIntrinsicsFiles:
    def test_round_trip(self, tmp_path):
        k = default_intrinsics()
        path = tmp_path / "intrinsics.json"
        write_intrinsics(path, k)
        assert load_intrinsics(path) == k

    def test_missing_field(self, tmp_path):
        path = tmp_path / "intrinsics.json"
        path.write_text('{"fx": 100.0}')
        with pytest.raises(SchemaError):
            load_intrinsics(path)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_json(tmp_path / "x.json", {"a": 1})
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]
