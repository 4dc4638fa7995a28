"""
Tests for Gaussian joints, frames, initialization and frame documents.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core import ConfigError, DomainError, ShapeError
from src.dipr import (
    DiprFrame, FrameParams, GaussianJoint, InitConfig, covariance, disturbance, doppler_envelope,
    frame_from_document, frame_to_document, gaussian_density, init_from_coarse, load_frame,
    quaternion_to_rotation, save_frame, tpose_frame,
)
from src.geometry import CoarseState

IDENTITY = [1.0, 0.0, 0.0, 0.0]


def joint(position=(3.0, 0.0, 0.0), scale=(0.1, 0.1, 0.1), rotation=IDENTITY,
          velocity=(0.0, 0.0, 0.0), opacity=1.0, features=None):
    features = doppler_envelope() if features is None else features
    return GaussianJoint(position, scale, rotation, velocity, opacity, features)


unit_quaternions = st.tuples(*[st.floats(-1.0, 1.0)] * 4).filter(
    lambda q: np.linalg.norm(q) > 0.1
).map(lambda q: np.asarray(q) / np.linalg.norm(q))
positive_scales = st.tuples(*[st.floats(0.01, 1.0)] * 3)


class TestDopplerEnvelope:
    def test_sums_to_one(self):
        phi = doppler_envelope(16, 2.0)
        assert phi.shape == (16,)
        assert phi.sum() == pytest.approx(1.0, abs=1e-12)
        assert int(np.argmax(phi)) == 8

    def test_too_short(self):
        with pytest.raises(ConfigError):
            doppler_envelope(1)


class TestGaussianJoint:
    def test_rotation_renormalized(self):
        j = joint(rotation=[2.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(j.rotation, IDENTITY)

    def test_zero_rotation(self):
        with pytest.raises(DomainError):
            joint(rotation=[0.0, 0.0, 0.0, 0.0])

    def test_non_positive_scale(self):
        with pytest.raises(DomainError):
            joint(scale=(0.1, 0.0, 0.1))

    def test_negative_opacity(self):
        with pytest.raises(DomainError):
            joint(opacity=-0.1)

    def test_features_must_sum_to_one(self):
        with pytest.raises(DomainError):
            joint(features=np.full(16, 0.1))

    def test_wrong_position_length(self):
        with pytest.raises(ShapeError):
            joint(position=(3.0, 0.0))


class TestCovariance:
    def test_identity_rotation(self):
        np.testing.assert_allclose(covariance(joint(scale=(0.1, 0.2, 0.3))), np.diag([0.01, 0.04, 0.09]))

    def test_quarter_turn_about_z(self):
        q = [math.cos(math.pi / 4), 0.0, 0.0, math.sin(math.pi / 4)]
        cov = covariance(joint(scale=(0.1, 0.2, 0.3), rotation=q))
        np.testing.assert_allclose(cov, np.diag([0.04, 0.01, 0.09]), atol=1e-12)

    @settings(max_examples=100)
    @given(q=unit_quaternions, s=positive_scales)
    def test_symmetric_positive_definite(self, q, s):
        cov = covariance(joint(scale=s, rotation=q))
        np.testing.assert_allclose(cov, cov.T, atol=1e-12)
        eigenvalues = np.linalg.eigvalsh(cov)
        assert np.all(eigenvalues > 0)
        np.testing.assert_allclose(np.sort(eigenvalues), np.sort(np.square(s)), rtol=1e-6, atol=1e-12)

    def test_non_unit_quaternion(self):
        with pytest.raises(DomainError):
            quaternion_to_rotation([1.0, 0.1, 0.0, 0.0])


class TestDensityAndDisturbance:
    def test_peak_at_center(self):
        j = joint()
        assert gaussian_density(j, j.position_m) == pytest.approx(1.0)
        assert disturbance(j, j.position_m) == pytest.approx(1.0 + 0.0j)

    def test_one_sigma(self):
        j = joint(scale=(0.1, 0.2, 0.3))
        assert gaussian_density(j, [3.0, 0.2, 0.0]) == pytest.approx(math.exp(-0.5))

    def test_disturbance_magnitude(self):
        j = joint(velocity=(1.0, 0.5, 0.0), opacity=0.5)
        x = [3.05, 0.02, 0.0]
        assert abs(disturbance(j, x)) == pytest.approx(0.5 * gaussian_density(j, x))


class TestDiprFrame:
    def test_params_round_trip(self, skeleton, init_config):
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0), cfg=init_config)
        params = frame.to_params()
        assert isinstance(params, FrameParams)
        assert params.positions.shape == (14, 3)
        assert params.doppler_bins == 16
        rebuilt = DiprFrame.from_params(params)
        np.testing.assert_array_equal(rebuilt.positions, frame.positions)

    def test_mixed_feature_lengths(self):
        with pytest.raises(ShapeError):
            DiprFrame((joint(), joint(features=doppler_envelope(8))))

    def test_skeleton_mismatch(self, skeleton):
        with pytest.raises(ShapeError):
            DiprFrame.from_positions(np.zeros((3, 3)) + 3.0).check_skeleton(skeleton)


class TestInitialization:
    def test_tpose_rooted_at_anchor(self, skeleton):
        frame = tpose_frame(skeleton, (3.0, 0.0, 0.0))
        np.testing.assert_allclose(frame.positions[skeleton.root_index], [3.0, 0.0, 0.0])
        np.testing.assert_allclose(frame.positions[skeleton.index("head")], [3.0, 0.0, 0.7])

    def test_empty_coarse_state_uses_default_anchor(self, skeleton):
        frame = init_from_coarse(skeleton, CoarseState(), InitConfig(default_anchor_m=(2.5, 0.1, 0.0)))
        np.testing.assert_allclose(frame.positions[skeleton.root_index], [2.5, 0.1, 0.0])
        np.testing.assert_array_equal(frame.velocities, 0.0)

    def test_weighted_centroid(self, skeleton):
        cs = CoarseState(
            positions_m=[[3.0, 0.0, 0.0], [3.4, 0.0, 0.0]],
            velocities_mps=[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            weights=[3.0, 1.0],
        )
        frame = init_from_coarse(skeleton, cs)
        np.testing.assert_allclose(frame.positions[skeleton.root_index], [3.1, 0.0, 0.0])

    def test_velocity_association(self, skeleton):
        head = np.array([3.0, 0.0, 0.7])
        cs = CoarseState(
            positions_m=[[3.0, 0.0, 0.0], head],
            velocities_mps=[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            weights=[1.0, 1e-9],
        )
        frame = init_from_coarse(skeleton, cs, InitConfig(association_radius_m=0.1))
        # Root sits on the first entry; the head's only neighbor carries 1 m/s
        np.testing.assert_allclose(frame.velocities[skeleton.root_index], [0.0, 0.0, 0.0], atol=1e-6)
        np.testing.assert_allclose(frame.velocities[skeleton.index("head")], [1.0, 0.0, 0.0], atol=1e-6)

    def test_unreached_joints_take_global_mean(self, skeleton):
        cs = CoarseState(positions_m=[[3.0, 0.0, 0.0]], velocities_mps=[[0.5, 0.0, 0.0]], weights=[1.0])
        frame = init_from_coarse(skeleton, cs, InitConfig(association_radius_m=0.05))
        np.testing.assert_allclose(frame.velocities, np.tile([0.5, 0.0, 0.0], (14, 1)))

    def test_config_rejects_short_anchor(self):
        with pytest.raises(ConfigError):
            InitConfig.from_config({"initialization": {"default_anchor_m": [3.0, 0.0]}})


class TestFrameDocuments:
    def test_save_and_load(self, skeleton, tmp_path):
        frame = tpose_frame(skeleton, (3.0, 0.1, 0.0), timestamp_s=0.2)
        path = tmp_path / "frame_0000.dipr.yaml"
        save_frame(frame, path, skeleton.joint_names)
        loaded = load_frame(path)
        assert loaded.timestamp_s == pytest.approx(0.2)
        np.testing.assert_allclose(loaded.positions, frame.positions)
        assert frame_to_document(frame, skeleton.joint_names)["joints"][1]["name"] == "head"

    def test_malformed_document(self):
        with pytest.raises(ConfigError):
            frame_from_document({"joints": [{"position_m": [3, 0, 0]}]})
