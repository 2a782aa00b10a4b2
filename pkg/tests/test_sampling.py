from collections import Counter

import numpy as np
import pytest

from info_core import mutual_information, push_through
from models import Distribution
from sampling import (
    blackwell,
    bssc,
    channel_from_name,
    identity,
    mirror,
    pad_input,
    random_and_point,
    random_channel,
    random_gate_joint,
    ss1,
    trial_seed,
)


def test_bssc_is_its_own_mirror():
    assert mirror(bssc(0.5)) == bssc(0.5)


def test_bssc_receivers_are_symmetric_at_uniform_input():
    bc = bssc(0.5)
    px = Distribution(masses=(0.5, 0.5))
    i_xy = mutual_information(push_through(px, bc.to_y))
    i_xz = mutual_information(push_through(px, bc.to_z))
    assert i_xy == pytest.approx(i_xz, abs=1e-12)


@pytest.mark.parametrize("skew", [0.0, 1.0, -0.2, 1.5])
def test_bssc_rejects_degenerate_skew(skew):
    with pytest.raises(ValueError, match="skew"):
        bssc(skew)


def test_blackwell_rows_are_point_masses():
    bc = blackwell()
    assert bc.input_size == 3
    np.testing.assert_array_equal(bc.to_y.array, [[1, 0], [1, 0], [0, 1]])
    np.testing.assert_array_equal(bc.to_z.array, [[1, 0], [0, 1], [0, 1]])
    for matrix in (bc.to_y.array, bc.to_z.array):
        assert set(matrix.ravel().tolist()) <= {0.0, 1.0}


def test_ss1_outputs_ignore_the_input():
    bc = ss1()
    px = Distribution(masses=(0.2, 0.8))
    assert mutual_information(push_through(px, bc.to_y)) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(push_through(px, bc.to_z)) == pytest.approx(0.0, abs=1e-12)


def test_random_channel_is_deterministic_per_seed():
    assert random_channel(3, 4, 42) == random_channel(3, 4, 42)
    assert random_channel(3, 4, 42) != random_channel(3, 4, 43)
    bc = random_channel(3, 4, 42)
    assert bc.input_size == 2
    assert bc.to_y.output_size == 3
    assert bc.to_z.output_size == 4


@pytest.mark.parametrize("ny,nz", [(1, 2), (2, 9)])
def test_random_channel_output_size_bounds(ny, nz):
    with pytest.raises(ValueError, match="output sizes"):
        random_channel(ny, nz, 0)


def test_random_gates_are_uniform():
    draws = 4000
    counts = Counter(random_gate_joint(seed).gate.index for seed in range(draws))
    assert set(counts) == set(range(16))
    for count in counts.values():
        assert abs(count / draws - 1 / 16) < 0.02


def test_random_gate_joint_is_reproducible():
    assert random_gate_joint(5) == random_gate_joint(5)


def test_random_and_point_respects_floor():
    for seed in range(50):
        pt = random_and_point(seed, floor=0.05)
        for mass in (pt.p11, pt.p10, pt.p01, pt.p00):
            assert mass >= 0.05 - 1e-12


def test_random_and_point_rejects_large_floor():
    with pytest.raises(ValueError, match="floor"):
        random_and_point(0, floor=0.25)


def test_pad_input_duplicates_first_row():
    bc = pad_input(bssc(0.3))
    assert bc.input_size == 3
    np.testing.assert_array_equal(bc.to_y.array[2], bc.to_y.array[0])
    np.testing.assert_array_equal(bc.to_z.array[2], bc.to_z.array[0])


def test_trial_seeds_are_offsets():
    assert [trial_seed(10, i) for i in range(3)] == [10, 11, 12]


class TestChannelFromName:
    def test_named_channels(self):
        assert channel_from_name("blackwell") == blackwell()
        assert channel_from_name("identity") == identity()
        assert channel_from_name("SS1") == ss1()

    def test_bssc_with_and_without_skew(self):
        assert channel_from_name("bssc") == bssc(0.5)
        assert channel_from_name("bssc:0.25") == bssc(0.25)

    def test_random_with_sizes(self):
        assert channel_from_name("random:7:3:2") == random_channel(3, 2, 7)
        assert channel_from_name("random:7") == random_channel(2, 2, 7)

    @pytest.mark.parametrize("name", ["nope", "bssc:abc", "bssc:2", "identity:1", "random:x"])
    def test_bad_names(self, name):
        with pytest.raises(ValueError):
            channel_from_name(name)
