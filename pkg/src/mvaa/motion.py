"""Salient-motion extraction: frame-difference energy, Gaussian smoothing,
and local-maximum peak picking.

Energy value i measures the transition frame i -> frame i+1 and is
timestamped at (i+1)/fps, so peak frame indices refer to the frame where
the new content lands.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewFrames, UnsmoothedInput
from .io.frames import FrameSequence


@dataclass
class MotionEnergy:
    """One non-negative energy per frame transition (length L-1)."""

    values: np.ndarray = field(repr=False)
    fps: float
    smoothed: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.values.size and self.values.min() < 0:
            raise ValueError("motion energy must be non-negative")

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class PeakSet:
    """Strictly increasing motion-peak timestamps and their frame indices."""

    peak_times: np.ndarray = field(repr=False)
    peak_frames: np.ndarray = field(repr=False)
    peak_values: np.ndarray = field(repr=False)
    fps: float

    def __post_init__(self):
        self.peak_times = np.asarray(self.peak_times, dtype=np.float64)
        self.peak_frames = np.asarray(self.peak_frames, dtype=np.int64)
        self.peak_values = np.asarray(self.peak_values, dtype=np.float64)
        if not (len(self.peak_times) == len(self.peak_frames)
                == len(self.peak_values)):
            raise ValueError("peak arrays must have equal length")
        if self.peak_times.size and np.any(np.diff(self.peak_times) <= 0):
            raise ValueError("peak times must be strictly increasing")
        if self.fps <= 0:
            raise ValueError("fps must be positive")

    def __len__(self) -> int:
        return len(self.peak_times)


def thread_count() -> int:
    """Worker cap honoring the MVAA_THREADS environment variable."""
    env = os.environ.get("MVAA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def motion_energy(video: FrameSequence) -> MotionEnergy:
    """Mean absolute RGB difference (0-255 scale) per frame transition."""
    frames = video.frames
    if len(frames) < 2:
        raise TooFewFrames("motion energy needs at least 2 frames")

    def diff_range(lo: int, hi: int) -> np.ndarray:
        a = frames[lo:hi].astype(np.int16)
        b = frames[lo + 1:hi + 1].astype(np.int16)
        return np.abs(a - b).mean(axis=(1, 2, 3))

    n = len(frames) - 1
    workers = thread_count()
    if workers == 1 or n < 8:
        values = diff_range(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: diff_range(*c), chunks))
        values = np.concatenate(parts)
    return MotionEnergy(values=values, fps=video.fps, smoothed=False)


def smooth(energy: MotionEnergy, sigma_frames: float = 2.0) -> MotionEnergy:
    """Gaussian smoothing: kernel truncated at 4 sigma, renormalized to sum 1,
    reflect padding at the boundaries."""
    if sigma_frames <= 0:
        raise ValueError("sigma_frames must be positive")
    values = energy.values
    if len(values) <= 1:
        return MotionEnergy(values=values.copy(), fps=energy.fps, smoothed=True)

    radius = max(1, int(round(4.0 * sigma_frames)))
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / sigma_frames) ** 2)
    kernel /= kernel.sum()

    padded = np.pad(values, radius, mode="symmetric")
    smoothed = np.convolve(padded, kernel, mode="valid")
    return MotionEnergy(values=np.maximum(smoothed, 0.0), fps=energy.fps,
                        smoothed=True)


def find_peaks(energy: MotionEnergy, min_distance_frames: int = 3,
               threshold_rel: float = 0.1) -> PeakSet:
    """Local maxima of a smoothed energy signal.

    A peak at i requires v[i] > v[i-1] and v[i] >= v[i+1] (endpoints are
    never peaks) and clears min + threshold_rel * (max - min). Peaks closer
    than min_distance_frames keep the larger value, ties keep the earlier.
    """
    if not energy.smoothed:
        raise UnsmoothedInput("find_peaks requires a smoothed energy signal")
    v = energy.values
    n = len(v)
    candidates = []
    if n >= 3:
        floor = v.min() + threshold_rel * (v.max() - v.min())
        for i in range(1, n - 1):
            if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] >= floor:
                candidates.append(i)

    # greedy suppression: tallest first, earlier wins ties
    order = sorted(candidates, key=lambda i: (-v[i], i))
    kept: list[int] = []
    for i in order:
        if all(abs(i - j) >= min_distance_frames for j in kept):
            kept.append(i)
    kept.sort()

    frames = np.array(kept, dtype=np.int64) + 1  # transition i is frame i+1
    return PeakSet(peak_times=frames / energy.fps, peak_frames=frames,
                   peak_values=v[kept], fps=energy.fps)
