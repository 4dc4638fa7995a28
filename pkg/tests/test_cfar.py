"""
Tests for CA-CFAR detection and point cloud files.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.cfar import CfarConfig, brute_force_cfar_oracle, ca_cfar, load_pointcloud, save_pointcloud
from src.core import ConfigError, Heatmap, HeatmapFormatError, HeatmapGrid, PointCloud

# pfa giving alpha = 4 for N = 6 training cells
PFA_ALPHA_4 = (1.0 + 4.0 / 6.0) ** -6


def row_grid(n):
    return HeatmapGrid(
        range_bins=n, doppler_bins=1, angle_bins=1,
        range_res_m=0.05, doppler_res_mps=0.125, angle_res_rad=0.04,
        range_min_m=2.775, doppler_min_mps=-0.0625, angle_min_rad=-0.02,
    )


def row_heatmap(values):
    return Heatmap(row_grid(len(values)), np.asarray(values, dtype=np.float64).reshape(-1, 1, 1))


ROW_CFG = CfarConfig(guard_cells=(1, 0), train_cells=(3, 0), pfa=PFA_ALPHA_4, axes=("range",))


class TestCfarConfig:
    def test_scale_factor(self):
        assert ROW_CFG.training_count() == 6
        assert ROW_CFG.scale_factor() == pytest.approx(4.0)

    def test_default_window(self):
        cfg = CfarConfig()
        assert cfg.half_widths() == ((2, 6), (2, 6))
        assert cfg.training_count() == 13 * 13 - 5 * 5

    def test_mapping_form(self):
        cfg = CfarConfig.from_config({"cfar": {"guard_cells": {"range": 1, "angle": 2}, "train_cells": 3}})
        assert cfg.guard_cells == (1, 2)
        assert cfg.train_cells == (3, 3)

    @pytest.mark.parametrize("cfar", [
        {"pfa": 0.0},
        {"pfa": 1.0},
        {"guard_cells": -1},
        {"train_cells": 0},
        {"axes": ["doppler"]},
        {"guard_cells": {"elevation": 1}},
    ])
    def test_invalid(self, cfar):
        with pytest.raises(ConfigError):
            CfarConfig.from_config({"cfar": cfar})


class TestCaCfar:
    def test_single_peak(self):
        cloud = ca_cfar(row_heatmap([1, 1, 1, 1, 50, 1, 1, 1, 1]), ROW_CFG)
        assert len(cloud) == 1
        assert cloud.intensities.tolist() == [50.0]
        np.testing.assert_allclose(cloud.positions_m[0], [3.0, 0.0, 0.0], atol=1e-12)

    def test_flat_row(self):
        assert len(ca_cfar(row_heatmap([1.0] * 9), ROW_CFG)) == 0

    def test_peak_below_threshold(self):
        assert len(ca_cfar(row_heatmap([1, 1, 1, 1, 3.9, 1, 1, 1, 1]), ROW_CFG)) == 0

    def test_window_too_large(self):
        with pytest.raises(ConfigError):
            ca_cfar(row_heatmap([1.0] * 5), ROW_CFG)

    def test_edges_never_detect(self, small_grid):
        values = np.ones(small_grid.shape)
        values[0, :, :] = 100.0
        cfg = CfarConfig(guard_cells=(1, 1), train_cells=(2, 2), pfa=1e-3)
        assert len(ca_cfar(Heatmap(small_grid, values), cfg)) == 0

    def test_zero_windows_never_detect(self):
        values = np.zeros(15)
        values[7] = 5.0
        cloud = ca_cfar(row_heatmap(values), ROW_CFG)
        assert cloud.intensities.tolist() == [5.0]
        assert len(ca_cfar(row_heatmap(np.zeros(15)), ROW_CFG)) == 0


def cube_grid():
    """16 x 8 x 8 grid for oracle comparisons."""
    return HeatmapGrid(
        range_bins=16, doppler_bins=8, angle_bins=8,
        range_res_m=0.1, doppler_res_mps=0.25, angle_res_rad=0.08,
        range_min_m=2.25, doppler_min_mps=-1.0, angle_min_rad=-0.32,
    )


def sparse_heatmap(seed, density=0.15):
    rng = np.random.default_rng(seed)
    grid = cube_grid()
    values = np.where(rng.random(grid.shape) < density, rng.exponential(1.0, grid.shape), 0.0)
    return Heatmap(grid, values)


def detection_set(cloud):
    return {tuple(row) for row in cloud.as_rows()[:, :4].tolist()}


ORACLE_CONFIGS = [
    CfarConfig(guard_cells=(0, 0), train_cells=(1, 1), pfa=1e-3),
    CfarConfig(guard_cells=(1, 0), train_cells=(1, 1), pfa=1e-2),
    CfarConfig(guard_cells=(0, 1), train_cells=(2, 1), pfa=1e-3),
    CfarConfig(guard_cells=(1, 1), train_cells=(1, 1), pfa=1e-4),
    CfarConfig(guard_cells=(1, 1), train_cells=(2, 2), pfa=1e-3),
    CfarConfig(guard_cells=(2, 0), train_cells=(3, 1), pfa=5e-2),
    CfarConfig(guard_cells=(0, 0), train_cells=(2, 3), pfa=1e-3),
    CfarConfig(guard_cells=(2, 1), train_cells=(4, 2), pfa=1e-3),
    CfarConfig(guard_cells=(1, 0), train_cells=(2, 2), pfa=1e-1),
    CfarConfig(guard_cells=(1, 0), train_cells=(2, 0), pfa=1e-2, axes=("range",)),
]


class TestOracleEquivalence:
    @pytest.mark.parametrize("cfg", ORACLE_CONFIGS, ids=lambda c: f"{c.guard_cells}-{c.train_cells}-{c.axes}")
    def test_random_sparse_heatmaps(self, cfg):
        for seed in range(100):
            h = sparse_heatmap(seed)
            fast = ca_cfar(h, cfg)
            np.testing.assert_array_equal(fast.as_rows(), brute_force_cfar_oracle(h, cfg).as_rows())
            assert np.all(fast.intensities > 0)

    @pytest.mark.parametrize("cfg", ORACLE_CONFIGS[:5])
    def test_scale_by_thousand(self, cfg):
        for seed in range(100):
            h = sparse_heatmap(seed)
            scaled = Heatmap(h.grid, h.values * 1e3)
            assert detection_set(ca_cfar(scaled, cfg)) == detection_set(ca_cfar(h, cfg))

    def test_dense_heatmap(self, small_grid, rng):
        values = rng.exponential(1.0, small_grid.shape)
        values[7, 4, 4] = 60.0
        values[10, 2, 3] = 40.0
        h = Heatmap(small_grid, values)
        cfg = CfarConfig(guard_cells=(1, 1), train_cells=(2, 1), pfa=1e-2)
        fast = ca_cfar(h, cfg)
        assert len(fast) >= 2
        np.testing.assert_array_equal(fast.as_rows(), brute_force_cfar_oracle(h, cfg).as_rows())

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        scale=st.sampled_from([1e-3, 0.25, 3.0, 1e3, 1024.0]),
    )
    def test_scale_invariant(self, seed, scale):
        grid = row_grid(12)
        grid = HeatmapGrid(**{**grid.to_dict(), "angle_bins": 7, "angle_min_rad": -0.14})
        values = np.random.default_rng(seed).exponential(1.0, grid.shape)
        cfg = CfarConfig(guard_cells=(1, 1), train_cells=(2, 1), pfa=1e-2)
        base = ca_cfar(Heatmap(grid, values), cfg)
        scaled = ca_cfar(Heatmap(grid, values * scale), cfg)
        np.testing.assert_array_equal(scaled.positions_m, base.positions_m)


class TestThresholdMonotonic:
    @pytest.mark.parametrize("seed", range(10))
    def test_larger_alpha_detects_subset(self, seed):
        h = sparse_heatmap(seed, density=0.4)
        pfas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-6]
        clouds = [detection_set(ca_cfar(h, CfarConfig(guard_cells=(1, 1), train_cells=(2, 2), pfa=p)))
                  for p in pfas]
        for looser, stricter in zip(clouds, clouds[1:]):
            assert stricter <= looser

    def test_alpha_grows_as_pfa_shrinks(self):
        alphas = [CfarConfig(pfa=p).scale_factor() for p in (1e-1, 1e-3, 1e-6)]
        assert alphas == sorted(alphas)


class TestPointCloudFiles:
    def test_save_and_load(self, tmp_path):
        cloud = PointCloud([[3.0, 0.1, 0.0], [2.5, -0.2, 0.0]], [1.0, -0.5], [50.0, 12.5])
        path = tmp_path / "points.txt"
        save_pointcloud(cloud, path)
        assert len(path.read_text().splitlines()) == 2
        np.testing.assert_allclose(load_pointcloud(path).as_rows(), cloud.as_rows())

    def test_empty_cloud(self, tmp_path):
        path = tmp_path / "empty.txt"
        save_pointcloud(PointCloud(), path)
        assert path.read_text() == ""
        assert len(load_pointcloud(path)) == 0

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2 3\n")
        with pytest.raises(HeatmapFormatError):
            load_pointcloud(path)
