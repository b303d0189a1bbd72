"""Evaluator tests: metric arithmetic, aggregation rules, invariances."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gazekit import (
    EvaluationError,
    GroundTruthRecord,
    PupilPrediction,
    RegionLabel,
    accuracy_report,
    map_angular_to_region,
    normalized_error,
    region_accuracy,
)
from gazekit.evaluate import (
    parse_ground_truth_file,
    render_report,
    serialize_ground_truth_file,
    summary_to_dict,
)


class TestNormalizedError:
    def test_exact_predictions_give_zero(self):
        assert normalized_error((1.0, 2.0), (9.0, 2.0), (1.0, 2.0), (9.0, 2.0)) == 0.0

    def test_hand_computed_case(self):
        # d_l = 3, d_r = 4, interocular 50 -> 0.08
        e = normalized_error((3.0, 0.0), (50.0, 4.0), (0.0, 0.0), (50.0, 0.0))
        assert e == pytest.approx(0.08, abs=1e-15)

    def test_boundary_bucket_is_closed(self):
        # d_l = 2, d_r = 3, interocular 60 -> exactly 0.05
        e = normalized_error((2.0, 0.0), (60.0, 3.0), (0.0, 0.0), (60.0, 0.0))
        assert e == pytest.approx(0.05, abs=1e-15)
        assert e <= 0.05

    def test_coincident_ground_truth_raises(self):
        with pytest.raises(EvaluationError):
            normalized_error((0.0, 0.0), (1.0, 1.0), (5.0, 5.0), (5.0, 5.0))

    def test_rigid_motion_and_scale_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            pts = rng.uniform(-40, 40, size=(4, 2))
            if np.allclose(pts[2], pts[3]):
                continue
            base = normalized_error(tuple(pts[0]), tuple(pts[1]), tuple(pts[2]), tuple(pts[3]))
            ang = rng.uniform(0, 2 * math.pi)
            scale = rng.uniform(0.2, 5.0)
            shift = rng.uniform(-100, 100, size=2)
            rot = np.array([[math.cos(ang), -math.sin(ang)],
                            [math.sin(ang), math.cos(ang)]])
            moved = (pts @ rot.T) * scale + shift
            again = normalized_error(tuple(moved[0]), tuple(moved[1]),
                                     tuple(moved[2]), tuple(moved[3]))
            assert again == pytest.approx(base, rel=1e-9)

    def test_symmetric_under_joint_eye_relabel(self):
        a = normalized_error((1.0, 1.0), (8.0, 3.0), (0.0, 0.0), (9.0, 1.0))
        b = normalized_error((8.0, 3.0), (1.0, 1.0), (9.0, 1.0), (0.0, 0.0))
        assert a == b


class TestAccuracyReport:
    @staticmethod
    def _pair(frame_id, e, interocular=100.0):
        """Build a prediction/truth pair with exact normalized error e."""
        gt = GroundTruthRecord(frame_id, (0.0, 0.0), (interocular, 0.0))
        pred = PupilPrediction(frame_id, (0.0, e * interocular), (interocular, 0.0))
        return pred, gt

    def test_threshold_counting(self):
        pairs = [self._pair("a", 0.03), self._pair("b", 0.07), self._pair("c", 0.2)]
        summary = accuracy_report([p for p, _ in pairs], [g for _, g in pairs])
        assert summary.n == 3
        assert summary.accuracy_at[0.05] == pytest.approx(1 / 3)
        assert summary.accuracy_at[0.10] == pytest.approx(2 / 3)
        assert summary.accuracy_at[0.25] == pytest.approx(1.0)

    def test_skipped_frames_excluded_but_reported(self):
        pairs = [self._pair(f, 0.01) for f in ("a", "b", "c")]
        preds = [p for p, _ in pairs]
        truths = [g for _, g in pairs]
        truths.append(GroundTruthRecord("d", (0.0, 0.0), (10.0, 0.0)))
        preds.append(PupilPrediction("d", None, None, skip_reason="NO_PUPIL"))
        summary = accuracy_report(preds, truths)
        assert summary.n == 3
        assert summary.accuracy_at[0.05] == 1.0
        assert summary.skipped == {"NO_PUPIL": 1}

    def test_no_matching_ids_raise(self):
        pred = PupilPrediction("a", (0.0, 0.0), (1.0, 0.0))
        gt = GroundTruthRecord("zzz", (0.0, 0.0), (1.0, 0.0))
        with pytest.raises(EvaluationError):
            accuracy_report([pred], [gt])

    def test_duplicate_truth_ids_raise(self):
        gt = GroundTruthRecord("a", (0.0, 0.0), (1.0, 0.0))
        with pytest.raises(EvaluationError):
            accuracy_report([PupilPrediction("a", (0.0, 0.0), (1.0, 0.0))], [gt, gt])

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40))
    def test_accuracy_monotone_in_threshold(self, errors):
        pairs = [self._pair(f"f{i}", e) for i, e in enumerate(errors)]
        summary = accuracy_report([p for p, _ in pairs], [g for _, g in pairs])
        values = [summary.accuracy_at[t] for t in sorted(summary.accuracy_at)]
        assert values == sorted(values)

    def test_order_independent(self):
        pairs = [self._pair(f"f{i}", e) for i, e in enumerate((0.01, 0.2, 0.07, 0.04))]
        preds = [p for p, _ in pairs]
        truths = [g for _, g in pairs]
        a = accuracy_report(preds, truths)
        b = accuracy_report(list(reversed(preds)), list(reversed(truths)))
        assert a.accuracy_at == b.accuracy_at and a.mean_e == b.mean_e

    def test_region_accuracy_from_signs(self):
        preds = []
        truths = []
        for i, (sign, region) in enumerate([(1, RegionLabel.LEFT), (-1, RegionLabel.RIGHT),
                                            (0, RegionLabel.CENTER)]):
            fid = f"f{i}"
            truths.append(GroundTruthRecord(fid, (0.0, 0.0), (10.0, 0.0), sign=sign))
            preds.append(PupilPrediction(fid, (0.0, 0.0), (10.0, 0.0), region=region))
        summary = accuracy_report(preds, truths)
        assert summary.region_accuracy == 1.0


class TestRegionMapping:
    def test_zero_maps_to_center(self):
        assert map_angular_to_region(0) is RegionLabel.CENTER

    def test_positive_maps_to_left_by_default(self):
        assert map_angular_to_region(1) is RegionLabel.LEFT
        assert map_angular_to_region(-1) is RegionLabel.RIGHT

    def test_configurable_flip(self):
        assert map_angular_to_region(1, positive_is_left=False) is RegionLabel.RIGHT

    def test_sign_sweep_is_bijective(self):
        labels = {map_angular_to_region(s) for s in (-1, 0, 1)}
        assert labels == {RegionLabel.LEFT, RegionLabel.RIGHT, RegionLabel.CENTER}


class TestRegionAccuracy:
    def test_identical_sequences(self):
        seq = [RegionLabel.LEFT, RegionLabel.CENTER, RegionLabel.RIGHT]
        frac, confusion = region_accuracy(seq, seq)
        assert frac == 1.0
        assert np.array_equal(confusion, np.eye(3, dtype=np.int64))

    def test_all_center_against_thirds(self):
        truth = [RegionLabel.CENTER, RegionLabel.LEFT, RegionLabel.RIGHT] * 4
        pred = [RegionLabel.CENTER] * 12
        frac, confusion = region_accuracy(pred, truth)
        assert frac == pytest.approx(1 / 3)
        assert confusion[:, 0].sum() == 12  # all predictions in the Center column

    def test_length_mismatch_raises(self):
        with pytest.raises(EvaluationError):
            region_accuracy([RegionLabel.LEFT], [])


class TestGroundTruthFile:
    def test_round_trip(self):
        records = [
            GroundTruthRecord("s00/000000", (10.5, 20.25), (50.0, 21.0)),
            GroundTruthRecord("s00/000003", (11.0, 20.0), (51.0, 22.0),
                              region=RegionLabel.LEFT),
            GroundTruthRecord("s01/000000", (12.0, 19.0), (52.0, 23.0), sign=-1),
        ]
        data = serialize_ground_truth_file(records)
        parsed = parse_ground_truth_file(data)
        assert parsed == records

    def test_malformed_lines_raise(self):
        with pytest.raises(EvaluationError):
            parse_ground_truth_file(b"f0,1.0,2.0\n")
        with pytest.raises(EvaluationError):
            parse_ground_truth_file(b"f0,1.0,2.0,3.0,abc\n")
        with pytest.raises(EvaluationError):
            parse_ground_truth_file(b"f0,1.0,2.0,3.0,4.0,Banana\n")

    def test_report_rendering_mentions_skips_and_accuracy(self):
        pred = PupilPrediction("a", (0.0, 0.0), (10.0, 0.0), region=RegionLabel.CENTER)
        gt = GroundTruthRecord("a", (0.0, 0.0), (10.0, 0.0), region=RegionLabel.CENTER)
        summary = accuracy_report([pred], [gt])
        text = render_report(summary)
        assert "accuracy e<=0.05" in text and "frames skipped" in text
        doc = summary_to_dict(summary)
        assert doc["n"] == 1 and doc["accuracy_at"]["0.05"] == 1.0
