import numpy as np
import pytest

from avm_toy.masking import VisibleMask, sample_mask


def test_single_frame_mask():
    rng = np.random.default_rng(0)
    for _ in range(20):
        mask = sample_mask(16, k_min=1, k_max=1, rng=rng)
        assert len(mask.visible_indices) == 1


def test_fully_visible_mask():
    mask = sample_mask(16, k_min=16, k_max=16, rng=np.random.default_rng(0))
    assert mask.visible_indices.tolist() == list(range(16))


def test_size_range_respected():
    rng = np.random.default_rng(1)
    sizes = {len(sample_mask(16, 1, 4, rng).visible_indices)
             for _ in range(300)}
    assert sizes == {1, 2, 3, 4}


def test_index_distribution_is_uniform():
    # 10^5 draws: per-index counts stay within 3 sigma of the multinomial
    rng = np.random.default_rng(2)
    length, draws = 16, 100_000
    counts = np.zeros(length)
    total = 0
    for _ in range(draws):
        idx = sample_mask(length, 1, 4, rng).visible_indices
        counts[idx] += 1
        total += len(idx)
    p = 1.0 / length
    expected = total * p
    sigma = np.sqrt(total * p * (1 - p))
    assert np.all(np.abs(counts - expected) <= 3 * sigma), counts


def test_mask_channel_shape():
    mask = VisibleMask(visible_indices=np.array([0, 7, 15]), length=16)
    flags = mask.as_channel()
    assert flags.shape == (16,)
    assert flags.sum() == 3
    assert flags[0] == flags[7] == flags[15] == 1.0


def test_invalid_masks_rejected():
    with pytest.raises(ValueError):
        VisibleMask(visible_indices=np.array([16]), length=16)
    with pytest.raises(ValueError):
        sample_mask(8, k_min=0, k_max=2)
    with pytest.raises(ValueError):
        sample_mask(8, k_min=3, k_max=9)
