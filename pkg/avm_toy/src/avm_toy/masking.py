"""Visible-frame masks: which frames the denoiser sees clean."""

from dataclasses import dataclass

import numpy as np


@dataclass
class VisibleMask:
    visible_indices: np.ndarray  # 0-based frame indices, sorted, unique
    length: int

    def __post_init__(self):
        idx = np.unique(np.asarray(self.visible_indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.length):
            raise ValueError("visible index out of range")
        self.visible_indices = idx

    def as_channel(self) -> np.ndarray:
        """Binary per-frame indicator (length,)."""
        flags = np.zeros(self.length)
        flags[self.visible_indices] = 1.0
        return flags


def sample_mask(length: int, k_min: int = 1, k_max: int = 4,
                rng: np.random.Generator | None = None) -> VisibleMask:
    """|V| uniform in [k_min, k_max], indices uniform without replacement.

    Resampled fresh for every training example so the model never sees a
    fixed conditioning pattern.
    """
    if not 1 <= k_min <= k_max <= length:
        raise ValueError("need 1 <= k_min <= k_max <= length")
    rng = rng if rng is not None else np.random.default_rng()
    k = int(rng.integers(k_min, k_max + 1))
    idx = rng.choice(length, size=k, replace=False)
    return VisibleMask(visible_indices=idx, length=length)
