"""Monotone beat-to-peak matching and retiming-map construction.

The matcher finds the monotone one-to-one matching of K = min(N, M) pairs
with the smallest total absolute timing error. Selection runs on exact
rational arithmetic so that ties are broken deterministically (smallest
index sequence) and the dynamic program agrees with exhaustive enumeration
down to the last bit; the reported cost is then the plain left-to-right
float sum over the chosen pairs.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .audio import BeatGrid
from .errors import EmptyInput, InstanceTooLarge, NoUsableAnchors
from .io.frames import FrameSequence
from .motion import PeakSet

_BRUTE_FORCE_LIMIT = 500_000


@dataclass
class AlignmentPlan:
    """Matched (beat_time, peak_time, peak_frame) pairs, increasing in both."""

    pairs: list[tuple[float, float, int]]
    total_cost: float
    source_fps: float
    music_duration: float

    def __post_init__(self):
        beats = [p[0] for p in self.pairs]
        peaks = [p[1] for p in self.pairs]
        if any(b2 <= b1 for b1, b2 in zip(beats, beats[1:])):
            raise ValueError("pair beat times must be strictly increasing")
        if any(v2 <= v1 for v1, v2 in zip(peaks, peaks[1:])):
            raise ValueError("pair peak times must be strictly increasing")
        recomputed = 0.0
        for b, v, _ in self.pairs:
            recomputed += abs(b - v)
        if abs(recomputed - self.total_cost) > 1e-6 * (len(self.pairs) + 1):
            raise ValueError("total_cost does not match the pair list")

    @property
    def K(self) -> int:
        return len(self.pairs)


@dataclass
class RetimingMap:
    """Anchors (target output frame, source time) plus output geometry."""

    anchors: list[tuple[int, float]]
    output_length: int
    output_fps: float

    def __post_init__(self):
        if self.output_length < 2:
            raise ValueError("output_length must be at least 2")
        if self.output_fps <= 0:
            raise ValueError("output_fps must be positive")
        targets = [a[0] for a in self.anchors]
        sources = [a[1] for a in self.anchors]
        if any(t2 <= t1 for t1, t2 in zip(targets, targets[1:])):
            raise ValueError("anchor target frames must be strictly increasing")
        if any(s2 < s1 for s1, s2 in zip(sources, sources[1:])):
            raise ValueError("anchor source times must be non-decreasing")
        if not self.anchors or targets[0] != 0 or targets[-1] != self.output_length - 1:
            raise ValueError("anchors must span frames 0 .. output_length-1")
        if sources[0] < 0:
            raise ValueError("source times must be non-negative")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _optimal_injection(small, large):
    """Indices j_1 < ... < j_K into `large` minimizing
    sum |small[i] - large[j_i]| over monotone injections of all of `small`.

    Exact suffix DP on rational costs; on ties the reconstruction takes the
    earliest available index, giving the lexicographically smallest result.
    """
    m, n = len(small), len(large)
    cost = [[Fraction(abs(small[i] - large[j])) for j in range(n)]
            for i in range(m)]
    # suffix[i][j]: optimal cost of matching small[i:] into large[j:]
    suffix = [[None] * (n + 1) for _ in range(m + 1)]
    suffix[m] = [Fraction(0)] * (n + 1)
    for i in range(m - 1, -1, -1):
        for j in range(n - (m - i), -1, -1):
            take = cost[i][j] + suffix[i + 1][j + 1]
            skip = suffix[i][j + 1] if n - (j + 1) >= m - i else None
            suffix[i][j] = take if skip is None or take <= skip else skip

    chosen = []
    i = j = 0
    while i < m:
        if cost[i][j] + suffix[i + 1][j + 1] == suffix[i][j]:
            chosen.append(j)
            i += 1
        j += 1
    return chosen


def _plan_from_indices(beats: BeatGrid, peaks: PeakSet, beat_idx, peak_idx):
    pairs = []
    total = 0.0
    for bi, pj in zip(beat_idx, peak_idx):
        b = float(beats.beats[bi])
        v = float(peaks.peak_times[pj])
        pairs.append((b, v, int(peaks.peak_frames[pj])))
        total += abs(b - v)
    return AlignmentPlan(pairs=pairs, total_cost=total, source_fps=peaks.fps,
                         music_duration=beats.duration)


def match(beats: BeatGrid, peaks: PeakSet,
          eq1_strict: bool = False) -> AlignmentPlan:
    """Optimal monotone matching of K = min(N, M) beat/peak pairs.

    With more beats than peaks the matcher also chooses which beats
    participate; eq1_strict instead fixes the first K beats, which forces
    the identity assignment onto the peak sequence.
    """
    m, n = len(beats), len(peaks)
    if m < 1 or n < 1:
        raise EmptyInput("matching needs at least one beat and one peak")
    b = [float(x) for x in beats.beats]
    v = [float(x) for x in peaks.peak_times]
    if m <= n:
        peak_idx = _optimal_injection(b, v)
        beat_idx = list(range(m))
    elif eq1_strict:
        beat_idx = list(range(n))
        peak_idx = list(range(n))
    else:
        beat_idx = _optimal_injection(v, b)
        peak_idx = list(range(n))
    return _plan_from_indices(beats, peaks, beat_idx, peak_idx)


def match_bruteforce(beats: BeatGrid, peaks: PeakSet) -> AlignmentPlan:
    """Exhaustive oracle for match(): enumerates every monotone injection.

    Combinations are generated in lexicographic order and only strictly
    better costs replace the incumbent, which reproduces match()'s
    tie-break exactly.
    """
    m, n = len(beats), len(peaks)
    if m < 1 or n < 1:
        raise EmptyInput("matching needs at least one beat and one peak")
    k = min(m, n)
    if math.comb(max(m, n), k) > _BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(
            f"C({max(m, n)}, {k}) monotone injections is too many to enumerate")

    b = [float(x) for x in beats.beats]
    v = [float(x) for x in peaks.peak_times]
    best_cost = None
    best = None
    if m <= n:
        for combo in combinations(range(n), k):
            c = sum((Fraction(abs(b[i] - v[j])) for i, j in enumerate(combo)),
                    Fraction(0))
            if best_cost is None or c < best_cost:
                best_cost, best = c, (list(range(m)), list(combo))
    else:
        for combo in combinations(range(m), k):
            c = sum((Fraction(abs(b[i] - v[j])) for j, i in enumerate(combo)),
                    Fraction(0))
            if best_cost is None or c < best_cost:
                best_cost, best = c, (list(combo), list(range(n)))
    return _plan_from_indices(beats, peaks, best[0], best[1])


def build_retiming(plan: AlignmentPlan, video: FrameSequence,
                   music_duration: float, output_fps: float,
                   start_source_time: float = 0.0,
                   end_source_time: float | None = None) -> RetimingMap:
    """Quantize matched pairs onto the output frame grid and add boundary
    anchors so the map covers the whole output.

    Interior anchors that collide after quantization keep the pair with the
    smaller |beat - peak|; anchors that would break monotonicity are dropped
    left-to-right (the earlier anchor wins).
    """
    if output_fps <= 0:
        raise ValueError("output_fps must be positive")
    length = round_half_up(music_duration * output_fps)
    if length < 2:
        raise NoUsableAnchors(
            f"output of {length} frame(s) cannot hold boundary anchors")
    if end_source_time is None:
        end_source_time = video.last_frame_time

    anchors: list[tuple[int, float]] = [(0, float(start_source_time))]
    quality: list[float] = [float("-inf")]  # boundary anchors never yield
    for b, v, _ in plan.pairs:
        target = round_half_up(b * output_fps)
        q = abs(b - v)
        if target <= 0 or target >= length - 1 or v > end_source_time:
            continue
        if target == anchors[-1][0]:
            if q < quality[-1]:
                anchors[-1] = (target, v)
                quality[-1] = q
        elif target > anchors[-1][0] and v >= anchors[-1][1]:
            anchors.append((target, v))
            quality.append(q)
    anchors.append((length - 1, float(end_source_time)))
    return RetimingMap(anchors=anchors, output_length=length,
                       output_fps=output_fps)


def map_source_times(retiming: RetimingMap) -> np.ndarray:
    """Piecewise-linear source time for every output frame index."""
    times = np.empty(retiming.output_length, dtype=np.float64)
    anchors = retiming.anchors
    for (g0, s0), (g1, s1) in zip(anchors, anchors[1:]):
        span = g1 - g0
        for f in range(g0, g1 + 1):
            times[f] = s0 + (f - g0) / span * (s1 - s0)
    return times
