"""
Tests for flat parameter vectors, the finite-difference oracle and the
randomized gradient check.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.core import ConfigError, DomainError, OracleError, ShapeError, load_config
from src.dipr import tpose_frame
from src.grad import GradcheckConfig, GradcheckReport, ParamVector, finite_difference_oracle, gradcheck, random_scene
from src.losses import LossWeights
from src.renderer import check_coverage

CONFIG_PATH = Path(__file__).parent.parent / "config" / "config.yaml"


@pytest.fixture
def vector(skeleton):
    return ParamVector.from_params(tpose_frame(skeleton, (3.0, 0.0, 0.0)).to_params())


class TestParamVector:
    def test_layout(self, vector, skeleton):
        assert vector.stride == 30
        assert len(vector) == skeleton.num_joints * 30
        assert vector.coordinate(0) == (0, "positions", 0)
        assert vector.coordinate(13) == (0, "opacities", 0)
        assert vector.coordinate(14) == (0, "doppler_features", 0)
        assert vector.coordinate(31) == (1, "positions", 1)

    def test_coordinate_matches_index_map(self, vector):
        entries = vector.index_map()
        assert len(entries) == len(vector)
        for idx in (0, 5, 9, 29, 30, 77, len(vector) - 1):
            assert vector.coordinate(idx) == entries[idx]

    def test_params_round_trip(self, vector):
        rebuilt = ParamVector.from_params(vector.to_params())
        np.testing.assert_array_equal(rebuilt.values, vector.values)

    def test_shifted_leaves_original(self, vector):
        moved = vector.shifted(0, 0.5)
        assert moved.values[0] == vector.values[0] + 0.5
        np.testing.assert_array_equal(moved.values[1:], vector.values[1:])

    def test_step_size_floor(self, vector):
        # scales coordinate: |0.12| is above its typical scale 0.1
        assert vector.step_size(3) == pytest.approx(0.12e-6)
        # velocity coordinate at zero uses the typical scale
        assert vector.step_size(10) == pytest.approx(1e-6)

    def test_wrong_size(self):
        with pytest.raises(ShapeError):
            ParamVector(np.zeros(29), 1, 16)


class TestFiniteDifferenceOracle:
    def test_quadratic(self, vector):
        def f(x):
            return float(np.sum(x.values ** 2))

        for idx in (0, 4, 13):
            expected = 2.0 * vector.values[idx]
            assert finite_difference_oracle(f, vector, idx, 1e-4) == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("h", [0.0, -1e-6])
    def test_step_must_be_positive(self, vector, h):
        with pytest.raises(DomainError):
            finite_difference_oracle(lambda x: 0.0, vector, 0, h)

    def test_non_finite(self, vector):
        with pytest.raises(OracleError):
            finite_difference_oracle(lambda x: float("nan"), vector, 0, 1e-6)


class TestGradcheckConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            GradcheckConfig.from_config({"gradcheck": {"samples": 10}})

    def test_scenes_positive(self):
        with pytest.raises(ConfigError):
            GradcheckConfig(scenes=0)

    def test_grid_overrides(self):
        grid = GradcheckConfig.grid_from_config(load_config(CONFIG_PATH))
        assert grid.shape == (32, 16, 16)
        assert grid.angle_min_rad == -0.32

    def test_unknown_grid_key(self):
        with pytest.raises(ConfigError):
            GradcheckConfig.grid_from_config({"gradcheck": {"grid": {"elevation_bins": 4}}})

    def test_report_document(self):
        document = GradcheckReport(requested=5, tolerance=1e-4).to_dict()
        assert document["pass"] is True
        assert document["requested"] == 5
        assert document["noise_floored"] == 0
        assert "rounding_excluded" not in document


class TestGradcheck:
    def test_random_scene_inside_coverage(self, skeleton, grid, kernel, rng):
        params, observed = random_scene(skeleton, grid, kernel, GradcheckConfig(), rng)
        check_coverage(params, grid, kernel)
        check_coverage(observed, grid, kernel)
        np.testing.assert_allclose(np.linalg.norm(params.rotations, axis=1), 1.0)
        np.testing.assert_allclose(params.doppler_features.sum(axis=1), 1.0)

    def test_zero_count_is_vacuous(self, skeleton, radar, grid, kernel):
        report = gradcheck(skeleton, radar, grid, kernel, cfg=GradcheckConfig(count=0))
        assert report.passed
        assert report.compared == 0

    def test_small_check_passes(self, skeleton, radar, kernel):
        config = load_config(CONFIG_PATH)
        cfg = replace(GradcheckConfig.from_config(config), count=12, scenes=2)
        report = gradcheck(skeleton, radar, GradcheckConfig.grid_from_config(config), kernel, LossWeights(), cfg)
        assert report.compared + report.below_threshold + report.kinks_excluded == 12
        assert report.noise_floored <= report.compared
        assert len(report.per_scene_max) == 2
        assert report.passed, report.worst_coordinate
