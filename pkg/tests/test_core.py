"""
Tests for core types, heatmap files and configuration helpers.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from src.core import (
    SPEED_OF_LIGHT, ConfigError, DomainError, Heatmap, HeatmapFormatError, HeatmapGrid,
    HeatmapWriteError, PointCloud, RadarParams, ShapeError, Skeleton, heatmap_read,
    heatmap_write, load_config, load_skeleton, merge_config,
)
from src.core.heatmap_io import meta_path


class TestRadarParams:
    def test_defaults(self, radar):
        assert radar.wavelength_m == pytest.approx(SPEED_OF_LIGHT / 77e9)
        assert radar.antenna_spacing_az_m == pytest.approx(radar.wavelength_m / 2)
        assert radar.chirp_slope == pytest.approx(4e9 / 60e-6)

    def test_inconsistent_wavelength(self):
        with pytest.raises(ConfigError):
            RadarParams.from_config({"radar": {"carrier_freq_hz": 77e9, "wavelength_m": 0.01}})

    def test_non_positive_bandwidth(self):
        with pytest.raises(ConfigError):
            RadarParams.from_config({"radar": {"bandwidth_hz": 0}})


class TestHeatmapGrid:
    def test_bin_centers(self, grid):
        assert grid.shape == (32, 25, 17)
        assert grid.center_of("range", 16) == pytest.approx(3.0)
        assert grid.center_of("doppler", 12) == pytest.approx(0.0)
        assert grid.center_of("doppler", 20) == pytest.approx(1.0)
        assert grid.center_of("angle", 8) == pytest.approx(0.0, abs=1e-12)

    def test_bin_of(self, grid):
        assert grid.bin_of("range", 3.0) == 16
        assert grid.bin_of("doppler", 1.0) == 20
        assert grid.bin_of("angle", 0.0) == 8
        assert grid.bin_of("range", 1.0) < 0

    def test_coverage_is_half_open(self, grid):
        low, high = grid.coverage("range")
        assert grid.covers("range", low)
        assert not grid.covers("range", high)

    def test_invalid_bins(self):
        with pytest.raises(ConfigError):
            HeatmapGrid(**{**HeatmapGrid.default_fields(), "range_bins": 0})

    def test_unknown_axis(self, grid):
        with pytest.raises(ValueError):
            grid.centers("elevation")


class TestHeatmap:
    def test_rejects_negative(self, small_grid):
        values = np.zeros(small_grid.shape)
        values[0, 0, 0] = -1.0
        with pytest.raises(DomainError):
            Heatmap(small_grid, values)

    def test_rejects_non_finite(self, small_grid):
        values = np.zeros(small_grid.shape)
        values[1, 1, 1] = np.nan
        with pytest.raises(DomainError):
            Heatmap(small_grid, values)

    def test_rejects_wrong_shape(self, small_grid):
        with pytest.raises(ShapeError):
            Heatmap(small_grid, np.zeros((2, 2, 2)))

    def test_values_are_read_only(self, small_grid):
        h = Heatmap.zeros(small_grid)
        with pytest.raises(ValueError):
            h.values[0, 0, 0] = 1.0

    def test_grid_mismatch(self, grid, small_grid):
        with pytest.raises(ShapeError):
            Heatmap.zeros(grid).require_same_grid(Heatmap.zeros(small_grid))


class TestHeatmapFiles:
    def test_write_then_read(self, small_grid, tmp_path):
        values = np.arange(np.prod(small_grid.shape), dtype=np.float64).reshape(small_grid.shape)
        h = Heatmap(small_grid, values)
        path = tmp_path / "frame.mgsh"
        heatmap_write(h, path)

        assert meta_path(path).exists()
        assert path.read_bytes()[:4] == b"MGSH"
        assert heatmap_read(path) == h

    def test_bad_magic(self, small_grid, tmp_path):
        path = tmp_path / "frame.mgsh"
        heatmap_write(Heatmap.zeros(small_grid), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(HeatmapFormatError):
            heatmap_read(path)

    def test_truncated_payload(self, small_grid, tmp_path):
        path = tmp_path / "frame.mgsh"
        heatmap_write(Heatmap.zeros(small_grid), path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(HeatmapFormatError):
            heatmap_read(path)

    def test_sidecar_is_json(self, small_grid, tmp_path):
        path = tmp_path / "frame.mgsh"
        heatmap_write(Heatmap.zeros(small_grid), path)
        assert meta_path(path).name == "frame.mgsh.meta.json"
        assert json.loads(meta_path(path).read_text())["range_bins"] == 16

    def test_missing_sidecar(self, small_grid, tmp_path):
        path = tmp_path / "frame.mgsh"
        heatmap_write(Heatmap.zeros(small_grid), path)
        meta_path(path).unlink()
        with pytest.raises(HeatmapFormatError):
            heatmap_read(path)

    def test_sidecar_disagrees_with_header(self, small_grid, tmp_path):
        path = tmp_path / "frame.mgsh"
        heatmap_write(Heatmap.zeros(small_grid), path)
        meta = json.loads(meta_path(path).read_text())
        meta["range_bins"] = 4
        meta_path(path).write_text(json.dumps(meta))
        with pytest.raises(HeatmapFormatError):
            heatmap_read(path)

    def test_unwritable_destination(self, small_grid, tmp_path):
        with pytest.raises(HeatmapWriteError):
            heatmap_write(Heatmap.zeros(small_grid), tmp_path / "missing" / "frame.mgsh")


class TestSkeleton:
    def test_shipped_skeleton(self, skeleton):
        assert skeleton.num_joints == 14
        assert len(skeleton.edges) == 13
        assert skeleton.root == "pelvis"
        assert np.all(skeleton.bone_lengths_m > 0)
        wrist = skeleton.index("left_wrist")
        assert skeleton.tpose_positions_m[wrist, 1] == pytest.approx(0.72)

    def test_bone_lengths_follow_tpose(self, skeleton):
        for (i, j), length in zip(skeleton.edges, skeleton.bone_lengths_m):
            distance = np.linalg.norm(skeleton.tpose_positions_m[i] - skeleton.tpose_positions_m[j])
            assert length == pytest.approx(distance)

    def test_cycle_rejected(self):
        tpose = [[0, 0, 0], [0, 1, 0], [0, 0, 1]]
        with pytest.raises(ConfigError):
            Skeleton.from_tpose(["pelvis", "a", "b"], [(0, 1), (1, 0)], tpose)

    def test_bone_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            Skeleton(("pelvis", "head"), ((0, 1),), [2.0], [[0, 0, 0], [0, 0, 1]])

    def test_unknown_edge_joint(self, tmp_path):
        path = tmp_path / "skeleton.yaml"
        path.write_text(
            "joints:\n  - {name: pelvis, tpose: [0, 0, 0]}\n  - {name: head, tpose: [0, 0, 1]}\n"
            "edges:\n  - [pelvis, neck]\n"
        )
        with pytest.raises(ConfigError):
            load_skeleton(path)


class TestPointCloud:
    def test_unequal_lengths(self):
        with pytest.raises(ShapeError):
            PointCloud(np.zeros((2, 3)), np.zeros(1), np.zeros(2))

    def test_rows(self):
        cloud = PointCloud([[3.0, 0.0, 0.0]], [1.0], [50.0])
        assert cloud.as_rows().tolist() == [[3.0, 0.0, 0.0, 1.0, 50.0]]
        assert len(PointCloud()) == 0


class TestConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_unparsable_file(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("radar: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_merge_is_recursive(self):
        base = {"fit": {"max_iters": 500, "seed": 0}, "grid": {"range_bins": 32}}
        merged = merge_config(base, {"fit": {"seed": 7}})
        assert merged == {"fit": {"max_iters": 500, "seed": 7}, "grid": {"range_bins": 32}}
        assert base["fit"]["seed"] == 0

    def test_shipped_config_builds(self):
        config = load_config(Path(__file__).parent.parent / "config" / "config.yaml")
        assert HeatmapGrid.from_config(config) == HeatmapGrid.from_config({})

    def test_shipped_config_writes_no_log_file(self):
        config = load_config(Path(__file__).parent.parent / "config" / "config.yaml")
        assert config["logging"]["log_file"] is None
