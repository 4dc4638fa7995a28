"""
Tests for the reconstruction, kinesiological and total losses.
"""

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from src.core import ConfigError, DomainError, Heatmap, HeatmapGrid, ShapeError
from src.dipr import DiprFrame, tpose_frame
from src.losses import (
    LossWeights, blur_range_angle, bone_loss, frozen_thresholds, kine_loss, mask_threshold, recon_loss, soft_iou_loss,
    total_loss, velocity_loss,
)
from src.losses.objectives import kine_loss_tensor
from src.renderer import params_to_tensors, render


class TestMaskThreshold:
    def test_top_ten_percent(self):
        assert mask_threshold(np.arange(1, 101), 0.1) == 91

    def test_all_zero(self):
        assert mask_threshold(np.zeros(50), 0.1) == 0.0

    def test_zero_quantile_falls_back_to_support(self):
        values = np.concatenate([np.zeros(95), np.arange(1.0, 6.0)])
        assert mask_threshold(values, 0.1) == 1.0


class TestReconLoss:
    def test_identical_heatmaps(self, skeleton, radar, grid, kernel):
        h = render(tpose_frame(skeleton, (3.0, 0.0, 0.0)), radar, grid, kernel)
        assert recon_loss(h, h) < 1e-9

    def test_disjoint_heatmaps(self, small_grid):
        a, b = np.zeros(small_grid.shape), np.zeros(small_grid.shape)
        a[:4] = 1.0
        b[-4:] = 1.0
        loss = recon_loss(Heatmap(small_grid, a), Heatmap(small_grid, b))
        assert loss > 0.9

    def test_both_empty(self, small_grid):
        assert recon_loss(Heatmap.zeros(small_grid), Heatmap.zeros(small_grid)) == 0.0

    def test_grid_mismatch(self, grid, small_grid):
        with pytest.raises(ShapeError):
            recon_loss(Heatmap.zeros(grid), Heatmap.zeros(small_grid))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), variant=st.sampled_from(["tanimoto", "product"]))
    def test_bounded(self, seed, variant):
        grid = HeatmapGrid(**{**HeatmapGrid.default_fields(), "range_bins": 6, "doppler_bins": 5, "angle_bins": 4})
        rng = np.random.default_rng(seed)
        a = Heatmap(grid, rng.exponential(1.0, grid.shape))
        b = Heatmap(grid, rng.exponential(1.0, grid.shape))
        loss = recon_loss(a, b, LossWeights(soft_iou=variant))
        assert 0.0 <= loss <= 1.0


class TestKinematicLosses:
    def test_tpose_has_no_bone_loss(self, skeleton):
        assert bone_loss(tpose_frame(skeleton, (3.0, 0.0, 0.0)), skeleton) == pytest.approx(0.0, abs=1e-24)

    def test_rigid_translation(self, skeleton):
        velocities = np.tile([0.4, -0.2, 0.1], (skeleton.num_joints, 1))
        frame = tpose_frame(skeleton, (3.0, 0.2, 0.0), velocities)
        assert kine_loss(frame, skeleton) == pytest.approx(0.0, abs=1e-24)

    def test_stretched_bone(self, skeleton):
        positions = tpose_frame(skeleton, (3.0, 0.0, 0.0)).positions
        positions[skeleton.index("head"), 2] += 0.1
        frame = DiprFrame.from_positions(positions)
        assert bone_loss(frame, skeleton) == pytest.approx(0.01)

    def test_velocity_along_bone(self, skeleton):
        velocities = np.zeros((skeleton.num_joints, 3))
        velocities[skeleton.index("head")] = [0.0, 0.0, 1.0]
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0), velocities)
        assert velocity_loss(frame, skeleton) == pytest.approx(1.0)
        assert kine_loss(frame, skeleton, LossWeights(lambda1=0.5)) == pytest.approx(0.5)

    def test_velocity_across_bone_is_free(self, skeleton):
        velocities = np.zeros((skeleton.num_joints, 3))
        velocities[skeleton.index("head")] = [1.0, 0.0, 0.0]
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0), velocities)
        assert velocity_loss(frame, skeleton) == pytest.approx(0.0, abs=1e-24)

    def test_coincident_joints(self, skeleton):
        frame = DiprFrame.from_positions(np.tile([3.0, 0.0, 0.0], (skeleton.num_joints, 1)))
        with pytest.raises(DomainError):
            velocity_loss(frame, skeleton)


class TestTotalLoss:
    def test_at_the_observation(self, skeleton, radar, grid, kernel):
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0))
        h_obs = render(frame, radar, grid, kernel)
        loss, grads = total_loss(frame, h_obs, skeleton, radar, grid, kernel)
        assert loss < 1e-9
        assert grads.positions.shape == (skeleton.num_joints, 3)

    def test_offset_frame_has_gradient(self, skeleton, radar, grid, kernel):
        observed = tpose_frame(skeleton, (3.0, 0.0, 0.0))
        h_obs = render(observed, radar, grid, kernel)
        frame = tpose_frame(skeleton, (3.1, 0.05, 0.0))
        w = LossWeights()
        thresholds = frozen_thresholds(frame, h_obs, radar, grid, kernel, w)
        loss, grads = total_loss(frame, h_obs, skeleton, radar, grid, kernel, w, thresholds)
        assert 0.0 < loss <= w.lambda2
        assert np.any(grads.positions != 0)

    def test_grid_mismatch(self, skeleton, radar, grid, small_grid, kernel):
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0))
        with pytest.raises(ShapeError):
            total_loss(frame, Heatmap.zeros(small_grid), skeleton, radar, grid, kernel)


class TestLossWeights:
    @pytest.mark.parametrize("overrides", [
        {"lambda1": 1.5},
        {"lambda2": -0.1},
        {"top_fraction": 0.0},
        {"softness_tau": 0.0},
        {"soft_iou": "dice"},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            LossWeights().with_overrides(**overrides)

    def test_from_config(self):
        w = LossWeights.from_config({"losses": {"lambda2": 0.6}})
        assert (w.lambda1, w.lambda2, w.top_fraction) == (0.5, 0.6, 0.1)


class TestGradientRouting:
    def test_reconstruction_off_freezes_appearance(self, skeleton, radar, grid, kernel):
        h_obs = render(tpose_frame(skeleton, (3.0, 0.0, 0.0)), radar, grid, kernel)
        params = tpose_frame(skeleton, (3.1, 0.05, 0.0)).to_params()
        params.positions[skeleton.index("head"), 2] += 0.05
        frame = DiprFrame.from_params(params)
        loss, grads = total_loss(frame, h_obs, skeleton, radar, grid, kernel, LossWeights(lambda2=0.0))
        assert loss > 0.0
        for name in ("scales", "opacities", "doppler_features"):
            np.testing.assert_array_equal(getattr(grads, name), 0.0)
        assert np.any(grads.positions != 0)

    def test_kinematic_loss_only_moves_positions_and_velocities(self, skeleton):
        params = tpose_frame(skeleton, (3.0, 0.0, 0.0)).to_params()
        params.positions[skeleton.index("head"), 0] += 0.04
        params.velocities[skeleton.index("head")] = [0.0, 0.0, 0.5]
        tensors = params_to_tensors(params, requires_grad=True)
        kine_loss_tensor(tensors, skeleton, LossWeights()).backward()
        for name in ("scales", "opacities", "rotations", "doppler_features"):
            grad = tensors[name].grad
            assert grad is None or torch.count_nonzero(grad) == 0
        assert torch.count_nonzero(tensors["positions"].grad) > 0
        assert torch.count_nonzero(tensors["velocities"].grad) > 0


class TestBlur:
    def test_zero_width_is_identity(self):
        values = torch.rand(6, 3, 5, dtype=torch.float64)
        assert blur_range_angle(values, 0.0) is values

    def test_constant_stays_constant(self):
        values = torch.full((8, 3, 6), 2.5, dtype=torch.float64)
        torch.testing.assert_close(blur_range_angle(values, 1.5), values)

    def test_doppler_slices_stay_separate(self):
        values = torch.zeros(9, 4, 9, dtype=torch.float64)
        values[4, 2, 4] = 1.0
        blurred = blur_range_angle(values, 1.0)
        assert torch.count_nonzero(blurred[:, [0, 1, 3]]) == 0
        assert torch.argmax(blurred[:, 2]).item() == 4 * 9 + 4
        assert blurred[4, 2, 4] < 1.0


class TestSoftIou:
    def test_identical_soft_masks(self):
        mask = torch.tensor([0.2, 0.5, 0.9, 1.0, 0.0], dtype=torch.float64)
        assert soft_iou_loss(mask, mask).item() == pytest.approx(0.0, abs=1e-15)
        assert soft_iou_loss(mask, mask, "product").item() > 0.1

    def test_variants_agree_on_hard_masks(self):
        a = torch.tensor([1.0, 1.0, 0.0, 0.0], dtype=torch.float64)
        b = torch.tensor([1.0, 0.0, 1.0, 0.0], dtype=torch.float64)
        assert soft_iou_loss(a, b).item() == pytest.approx(soft_iou_loss(a, b, "product").item())
