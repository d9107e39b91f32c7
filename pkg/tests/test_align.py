import math
import random
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvaa.align import (
    AlignmentPlan,
    RetimingMap,
    build_retiming,
    match,
    match_bruteforce,
    round_half_up,
)
from mvaa.audio import BeatGrid
from mvaa.errors import EmptyInput, InstanceTooLarge, NoUsableAnchors
from mvaa.io.frames import FrameSequence
from mvaa.motion import PeakSet


def grid_of(times, duration=None):
    times = list(times)
    return BeatGrid(beats=times, bpm=120.0,
                    duration=duration if duration is not None else times[-1] + 1.0)


def peaks_of(times, fps=16.0):
    times = list(times)
    return PeakSet(peak_times=times,
                   peak_frames=[max(1, int(round(t * fps))) for t in times],
                   peak_values=[1.0] * len(times), fps=fps)


def instance(rng, m, n):
    def draw(k):
        while True:
            xs = sorted(rng.uniform(0, 10) for _ in range(k))
            if all(b > a for a, b in zip(xs, xs[1:])):
                return xs
    return grid_of(draw(m), duration=11.0), peaks_of(draw(n))


# -- worked example and small cases --------------------------------------------

def test_three_beat_worked_example():
    beats = grid_of([0.5, 1.0, 1.5], duration=2.0)
    peaks = peaks_of([0.45, 0.7, 1.1, 1.6])
    oracle = match_bruteforce(beats, peaks)
    plan = match(beats, peaks)
    assert [p[1] for p in plan.pairs] == [0.45, 1.1, 1.6]  # peak indices 1, 3, 4
    assert plan.pairs == oracle.pairs
    assert plan.total_cost == oracle.total_cost
    assert plan.total_cost == pytest.approx(0.25, abs=1e-12)


def test_identical_sets_match_perfectly():
    times = [0.5, 1.25, 2.0, 3.5]
    plan = match(grid_of(times, duration=4.0), peaks_of(times))
    assert plan.total_cost == 0.0
    assert [p[0] for p in plan.pairs] == times
    assert [p[1] for p in plan.pairs] == times


def test_single_beat_takes_nearest_peak():
    plan = match(grid_of([1.0], duration=2.0), peaks_of([0.2, 0.9, 1.8]))
    assert plan.K == 1
    assert plan.pairs[0][1] == 0.9
    assert plan.total_cost == pytest.approx(0.1)


def test_more_beats_than_peaks_chooses_best_subset():
    # beats 0.0 and 5.0 are decoys; the optimum pairs 2.0 and 3.0
    beats = grid_of([0.0, 2.0, 3.0, 5.0], duration=6.0)
    peaks = peaks_of([1.9, 3.1])
    plan = match(beats, peaks)
    assert [p[0] for p in plan.pairs] == [2.0, 3.0]
    oracle = match_bruteforce(beats, peaks)
    assert plan.pairs == oracle.pairs and plan.total_cost == oracle.total_cost


def test_eq1_strict_fixes_leading_beats():
    beats = grid_of([0.0, 2.0, 3.0, 5.0], duration=6.0)
    peaks = peaks_of([1.9, 3.1])
    strict = match(beats, peaks, eq1_strict=True)
    assert [p[0] for p in strict.pairs] == [0.0, 2.0]
    relaxed = match(beats, peaks)
    assert relaxed.total_cost <= strict.total_cost


def test_tie_prefers_smallest_peak_indices():
    # both peaks are 0.5 away: the earlier peak must win in both routes
    beats = grid_of([1.0], duration=3.0)
    peaks = peaks_of([0.5, 1.5])
    plan = match(beats, peaks)
    oracle = match_bruteforce(beats, peaks)
    assert plan.pairs[0][1] == 0.5
    assert oracle.pairs[0][1] == 0.5


def test_empty_inputs_rejected():
    with pytest.raises(EmptyInput):
        match(grid_of([1.0]), PeakSet(peak_times=[], peak_frames=[],
                                      peak_values=[], fps=16.0))


def test_bruteforce_rejects_huge_instances():
    rng = random.Random(0)
    beats, peaks = instance(rng, 10, 50)  # C(50, 10) is ~10 billion
    with pytest.raises(InstanceTooLarge):
        match_bruteforce(beats, peaks)


# -- oracle agreement ------------------------------------------------------------

def test_500_random_instances_agree_bit_for_bit():
    rng = random.Random(20240817)
    start = time.perf_counter()
    for _ in range(500):
        m, n = rng.randint(1, 7), rng.randint(1, 7)
        beats, peaks = instance(rng, m, n)
        plan = match(beats, peaks)
        oracle = match_bruteforce(beats, peaks)
        assert plan.total_cost == oracle.total_cost  # bit-equal floats
        assert plan.pairs == oracle.pairs
        assert plan.K == min(m, n)
    assert time.perf_counter() - start < 1.0


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_matcher_equals_oracle_on_tie_heavy_grids(m, n, rng):
    # times on a coarse grid provoke exact cost ties; the shared tie-break
    # must keep both routes identical
    def draw(k):
        xs = sorted(rng.sample(range(0, 40), k))
        return [x / 4.0 for x in xs]
    beats = grid_of(draw(m), duration=11.0)
    peaks = peaks_of(draw(n))
    plan = match(beats, peaks)
    oracle = match_bruteforce(beats, peaks)
    assert plan.pairs == oracle.pairs
    assert plan.total_cost == oracle.total_cost


def test_translation_equivariance():
    rng = random.Random(7)
    for delta in (1.0, 2.0, 4.0):
        # dyadic times keep x + delta exact, so the invariance is bit-exact
        def draw(k):
            return [x / 1024.0 for x in sorted(rng.sample(range(0, 10240), k))]
        bt, vt = draw(5), draw(6)
        base = match(grid_of(bt, duration=16.0), peaks_of(vt))
        moved = match(grid_of([b + delta for b in bt], duration=16.0),
                      peaks_of([v + delta for v in vt]))
        assert moved.total_cost == base.total_cost
        assert [p[1] - delta for p in moved.pairs] == [p[1] for p in base.pairs]


def test_adding_a_peak_never_hurts_when_peaks_outnumber_beats():
    rng = random.Random(99)
    for _ in range(50):
        m = rng.randint(1, 5)
        n = rng.randint(m, 7)
        beats, peaks = instance(rng, m, n)
        base = match(beats, peaks)
        extra = sorted(set(peaks.peak_times.tolist()) | {rng.uniform(0, 10)})
        grown = match(beats, peaks_of(extra))
        assert grown.total_cost <= base.total_cost + 1e-15


def test_pairs_strictly_increase_in_both_coordinates():
    rng = random.Random(5)
    for _ in range(30):
        beats, peaks = instance(rng, rng.randint(1, 7), rng.randint(1, 7))
        plan = match(beats, peaks)
        bs = [p[0] for p in plan.pairs]
        vs = [p[1] for p in plan.pairs]
        assert all(b2 > b1 for b1, b2 in zip(bs, bs[1:]))
        assert all(v2 > v1 for v1, v2 in zip(vs, vs[1:]))


# -- retiming construction ---------------------------------------------------------

def source_video(length=13, fps=10.0):
    frames = np.zeros((length, 8, 8, 3), np.uint8)
    for i in range(length):
        frames[i] = i  # encode the frame index in the pixels
    return FrameSequence(frames=frames, fps=fps)


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.4999) == 2
    assert round_half_up(0.0) == 0


def test_build_retiming_worked_example():
    video = source_video(13, fps=10.0)  # last frame at 1.2 s
    plan = AlignmentPlan(pairs=[(0.5, 0.4, 4), (1.0, 1.1, 11)],
                         total_cost=abs(0.5 - 0.4) + abs(1.0 - 1.1),
                         source_fps=10.0, music_duration=1.5)
    retiming = build_retiming(plan, video, music_duration=1.5, output_fps=16.0)
    assert retiming.output_length == 24
    assert retiming.anchors == [(0, 0.0), (8, 0.4), (16, 1.1),
                                (23, video.last_frame_time)]


def test_empty_plan_gives_boundary_only_map():
    video = source_video()
    plan = AlignmentPlan(pairs=[], total_cost=0.0, source_fps=10.0,
                         music_duration=2.0)
    retiming = build_retiming(plan, video, 2.0, 16.0)
    assert retiming.anchors == [(0, 0.0), (31, video.last_frame_time)]


def test_colliding_targets_keep_better_matched_pair():
    video = source_video()
    # both beats quantize to output frame 8; the second pair is closer
    plan = AlignmentPlan(pairs=[(0.49, 0.2, 2), (0.51, 0.5, 5)],
                         total_cost=abs(0.49 - 0.2) + abs(0.51 - 0.5),
                         source_fps=10.0, music_duration=1.5)
    retiming = build_retiming(plan, video, 1.5, 16.0)
    assert retiming.anchors[1] == (8, 0.5)
    assert len(retiming.anchors) == 3


def test_too_short_output_rejected():
    video = source_video()
    plan = AlignmentPlan(pairs=[], total_cost=0.0, source_fps=10.0,
                         music_duration=0.05)
    with pytest.raises(NoUsableAnchors):
        build_retiming(plan, video, 0.05, 16.0)


def test_retiming_map_invariants():
    with pytest.raises(ValueError):
        RetimingMap(anchors=[(0, 0.0), (5, 1.0), (5, 1.2), (9, 2.0)],
                    output_length=10, output_fps=16.0)
    with pytest.raises(ValueError):
        RetimingMap(anchors=[(0, 1.0), (9, 0.5)], output_length=10,
                    output_fps=16.0)
    with pytest.raises(ValueError):
        RetimingMap(anchors=[(1, 0.0), (9, 1.0)], output_length=10,
                    output_fps=16.0)
