import numpy as np
import pytest

from utils import Block, block_lattice, maximize_on_lattice, polish_maximum, simplex_lattice

TARGET = np.array([0.2, 0.5, 0.3])


def _peak(points: np.ndarray) -> np.ndarray:
    return -np.sum((points - TARGET) ** 2, axis=-1)


def test_polish_reaches_an_interior_peak():
    point, value, evaluations = polish_maximum(_peak, np.full(3, 1 / 3), [Block(3)], 2000)
    np.testing.assert_allclose(point, TARGET, atol=1e-5)
    assert value == pytest.approx(0.0, abs=1e-9)
    assert evaluations > 1


def test_polish_keeps_an_unbeaten_start():
    point, value, _ = polish_maximum(_peak, TARGET, [Block(3)], 500)
    np.testing.assert_array_equal(point, TARGET)
    assert value == 0.0


def test_polish_respects_block_totals():
    blocks = [Block(2, 0.3), Block(2, 0.7)]
    start = np.array([0.15, 0.15, 0.35, 0.35])

    def objective(points: np.ndarray) -> np.ndarray:
        return points[:, 0] + points[:, 3]

    point, _, _ = polish_maximum(objective, start, blocks, 2000)
    assert point[:2].sum() == pytest.approx(0.3, abs=1e-12)
    assert point[2:].sum() == pytest.approx(0.7, abs=1e-12)
    assert objective(point[None, :])[0] > objective(start[None, :])[0]


def test_precomputed_lattice_values_change_nothing(coarse_cfg):
    blocks = [Block(3)]
    lattice = simplex_lattice(3, coarse_cfg.grid_resolution)
    fresh = maximize_on_lattice(_peak, lattice, blocks, coarse_cfg)
    reused = maximize_on_lattice(_peak, lattice, blocks, coarse_cfg, values=_peak(lattice))
    np.testing.assert_array_equal(fresh[0], reused[0])
    assert fresh[1] == reused[1]
    assert fresh[2] - reused[2] == len(lattice)


def test_block_lattice_totals():
    lattice = block_lattice([Block(2, 0.25), Block(2, 0.75)], 5)
    assert lattice.shape == (25, 4)
    np.testing.assert_allclose(lattice[:, :2].sum(axis=1), 0.25)
    np.testing.assert_allclose(lattice[:, 2:].sum(axis=1), 0.75)
