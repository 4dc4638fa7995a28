"""
Tests for pose metrics, Procrustes alignment and hard heatmap IoU.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from src.core import ConfigError, Heatmap, MetricError, ShapeError
from src.dipr import save_frame, tpose_frame
from src.evaluation import (
    PoseMetrics, PoseSequence, hard_iou, load_pose_sequence, motion_intensity, mpjpe, pa_mpjpe,
    procrustes_align,
)
from src.synth import GroundTruthSequence, save_ground_truth


@pytest.fixture
def tpose(skeleton):
    return tpose_frame(skeleton, (3.0, 0.0, 0.0)).positions


def sequence(*frames):
    return PoseSequence(np.stack(frames))


class TestMpjpe:
    def test_constant_offset(self, tpose):
        gt = sequence(tpose, tpose)
        pred = sequence(tpose + [0.03, 0.04, 0.0], tpose + [0.03, 0.04, 0.0])
        assert mpjpe(pred, gt) == pytest.approx(0.05)

    def test_shape_mismatch(self, tpose):
        with pytest.raises(ShapeError):
            mpjpe(sequence(tpose), sequence(tpose, tpose))

    def test_needs_three_axes(self):
        with pytest.raises(ShapeError):
            PoseSequence(np.zeros((2, 14, 2)))


class TestProcrustes:
    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        scale=st.floats(0.5, 2.0),
        shift=st.tuples(*[st.floats(-1.0, 1.0)] * 3),
    )
    def test_similarity_transform_is_removed(self, seed, scale, shift):
        gt = np.random.default_rng(seed).normal(size=(14, 3))
        rotation = Rotation.random(random_state=seed % (2**31))
        pred = scale * rotation.apply(gt) + np.asarray(shift)
        assert pa_mpjpe(sequence(pred), sequence(gt)) == pytest.approx(0.0, abs=1e-9)

    def test_rigid_alignment_keeps_scale_error(self, tpose):
        centered = tpose - tpose.mean(axis=0)
        pred = 1.2 * centered
        assert pa_mpjpe(sequence(pred), sequence(centered), with_scale=True) == pytest.approx(0.0, abs=1e-12)
        assert pa_mpjpe(sequence(pred), sequence(centered), with_scale=False) > 0.01

    def test_too_few_joints(self):
        with pytest.raises(MetricError):
            procrustes_align(np.eye(3)[:2], np.eye(3)[:2])

    def test_collinear_joints(self):
        line = np.outer(np.arange(5.0), [1.0, 0.0, 0.0])
        with pytest.raises(MetricError):
            procrustes_align(line, line + [0.0, 0.1, 0.0])


class TestMotionIntensity:
    def test_uniform_motion(self, tpose):
        seq = sequence(tpose, tpose + [0.1, 0.0, 0.0], tpose + [0.2, 0.0, 0.0])
        np.testing.assert_allclose(motion_intensity(seq, 0.1), [1.0, 1.0])

    def test_single_frame(self, tpose):
        with pytest.raises(MetricError):
            motion_intensity(sequence(tpose), 0.1)

    def test_bad_interval(self, tpose):
        with pytest.raises(ConfigError):
            motion_intensity(sequence(tpose, tpose), 0.0)


class TestHardIou:
    def test_identical(self, small_grid, rng):
        h = Heatmap(small_grid, rng.exponential(1.0, small_grid.shape))
        assert hard_iou(h, h) == 1.0

    def test_both_empty(self, small_grid):
        assert hard_iou(Heatmap.zeros(small_grid), Heatmap.zeros(small_grid)) == 1.0

    def test_disjoint(self, small_grid):
        a, b = np.zeros(small_grid.shape), np.zeros(small_grid.shape)
        a[0] = 1.0
        b[-1] = 1.0
        assert hard_iou(Heatmap(small_grid, a), Heatmap(small_grid, b)) == 0.0


class TestPoseMetrics:
    def test_evaluate(self, tpose):
        gt = sequence(tpose, tpose + [0.1, 0.0, 0.0])
        pred = sequence(tpose + [0.0, 0.02, 0.0], tpose + [0.1, 0.02, 0.0])
        report, per_frame = PoseMetrics().evaluate(pred, gt, 0.1)
        assert report["frames"] == 2
        assert report["mpjpe_m"] == pytest.approx(0.02)
        assert report["pa_mpjpe_m"] == pytest.approx(0.0, abs=1e-12)
        assert report["motion_intensity_mae_mps"] == pytest.approx(0.0, abs=1e-12)
        assert list(per_frame.columns) == [
            "frame", "mpjpe_m", "pa_mpjpe_m", "motion_intensity_pred_mps", "motion_intensity_gt_mps",
        ]
        assert np.isnan(per_frame["motion_intensity_gt_mps"].iloc[0])

    def test_single_frame_has_no_intensity(self, tpose):
        report, per_frame = PoseMetrics().evaluate(sequence(tpose), sequence(tpose), 0.1)
        assert "motion_intensity_mae_mps" not in report
        assert "MPJPE" in PoseMetrics().format_metrics_report(report)

    def test_from_config(self):
        assert PoseMetrics.from_config({"evaluation": {"procrustes_scale": False}}).with_scale is False
        assert PoseMetrics.from_config({}).with_scale is True


class TestLoadPoseSequence:
    def test_ground_truth_file(self, skeleton, tpose, tmp_path):
        path = tmp_path / "gt.poses"
        save_ground_truth(GroundTruthSequence(tpose[None], np.zeros((1, 14, 3)), 0.1, skeleton.joint_names), path)
        seq = load_pose_sequence(path)
        assert seq.positions_m.shape == (1, 14, 3)
        assert seq.joint_names == tuple(skeleton.joint_names)

    def test_frame_directory(self, skeleton, tmp_path):
        for t in range(3):
            frame = tpose_frame(skeleton, (3.0 - 0.1 * t, 0.0, 0.0), timestamp_s=0.1 * t)
            save_frame(frame, tmp_path / f"frame_{t:04d}.dipr.yaml", skeleton.joint_names)
        seq = load_pose_sequence(tmp_path)
        assert len(seq) == 3
        assert seq.positions_m[2, skeleton.root_index, 0] == pytest.approx(2.8)

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_pose_sequence(tmp_path / "absent.poses")

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_pose_sequence(tmp_path)
