"""End-to-end composition of the analysis, alignment, and rendering stages.

Long tracks can be processed as sequential segments: each segment gets its
own matching and retiming over the remaining source footage, and the final
rendered frame of one segment becomes the first source anchor of the next,
so the concatenated output is seamless.
"""

from dataclasses import dataclass, field

import numpy as np

from .align import AlignmentPlan, RetimingMap, build_retiming, match
from .audio import BeatGrid, beats_from_audio
from .config import PipelineConfig
from .io.frames import FrameSequence
from .io.wav import AudioTrack
from .metrics import evaluate
from .motion import PeakSet, find_peaks, motion_energy, smooth
from .render import backend_crossfade, backend_external, backend_hold, \
    backend_timewarp, job_from_retiming


def analyze_beats(audio: AudioTrack, cfg: PipelineConfig) -> BeatGrid:
    return beats_from_audio(audio, n_fft=cfg.n_fft, hop=cfg.hop,
                            n_mels=cfg.n_mels, bpm_min=cfg.bpm_min,
                            bpm_max=cfg.bpm_max, prior_bpm=cfg.prior_bpm,
                            tightness=cfg.tightness)


def analyze_motion(video: FrameSequence, cfg: PipelineConfig,
                   apply_smoothing: bool = True):
    """Returns (raw energy, signal used for picking, peaks)."""
    energy = motion_energy(video)
    picked = smooth(energy, cfg.sigma_frames) if apply_smoothing else energy
    peaks = find_peaks(picked, min_distance_frames=cfg.min_distance_frames,
                       threshold_rel=cfg.threshold_rel)
    return energy, picked, peaks


def _empty_plan(peaks: PeakSet, duration: float) -> AlignmentPlan:
    return AlignmentPlan(pairs=[], total_cost=0.0, source_fps=peaks.fps,
                         music_duration=duration)


@dataclass
class Segment:
    start: float                 # music-time start of the segment
    duration: float
    plan: AlignmentPlan          # segment-local beat times
    retiming: RetimingMap        # absolute source times
    rendered: FrameSequence = field(repr=False, default=None)


def plan_segments(beats: BeatGrid, peaks: PeakSet, video: FrameSequence,
                  cfg: PipelineConfig,
                  segment_seconds: float | None) -> list[Segment]:
    duration = beats.duration
    min_len = 2.0 / cfg.output_fps
    if segment_seconds is None or segment_seconds >= duration:
        edges = [(0.0, duration)]
    else:
        if segment_seconds < min_len:
            raise ValueError("segments shorter than two output frames")
        edges = []
        t = 0.0
        while t < duration - 1e-9:
            end = min(t + segment_seconds, duration)
            if duration - end < min_len:  # absorb the final sliver
                end = duration
            edges.append((t, end))
            t = end

    segments = []
    cursor = 0.0  # source time already consumed by earlier segments
    for seg_index, (start, end) in enumerate(edges):
        seg_dur = end - start
        local_beats = beats.beats[(beats.beats >= start) & (beats.beats < end)] - start
        usable = peaks.peak_times >= cursor - 1e-12
        local_peaks = PeakSet(peak_times=peaks.peak_times[usable] - cursor,
                              peak_frames=peaks.peak_frames[usable],
                              peak_values=peaks.peak_values[usable],
                              fps=peaks.fps)
        if len(local_beats) and len(local_peaks):
            grid = BeatGrid(beats=local_beats, bpm=beats.bpm, duration=seg_dur)
            plan = match(grid, local_peaks, eq1_strict=cfg.eq1_strict)
        else:
            plan = _empty_plan(peaks, seg_dur)

        # rebuild the plan on absolute source times for the retiming map
        abs_pairs = [(b, v + cursor, f) for b, v, f in plan.pairs]
        abs_plan = AlignmentPlan(pairs=abs_pairs,
                                 total_cost=_recompute_cost(abs_pairs),
                                 source_fps=plan.source_fps,
                                 music_duration=seg_dur)
        retiming = build_retiming(abs_plan, video, seg_dur, cfg.output_fps,
                                  start_source_time=cursor)

        last = seg_index == len(edges) - 1
        if not last:
            interior = retiming.anchors[1:-1]
            hold_at = interior[-1][1] if interior else cursor
            anchors = retiming.anchors[:-1] + [(retiming.output_length - 1,
                                                hold_at)]
            retiming = RetimingMap(anchors=anchors,
                                   output_length=retiming.output_length,
                                   output_fps=retiming.output_fps)
        segments.append(Segment(start=start, duration=seg_dur, plan=plan,
                                retiming=retiming))
        cursor = retiming.anchors[-1][1]
    return segments


def _recompute_cost(pairs) -> float:
    total = 0.0
    for b, v, _ in pairs:
        total += abs(b - v)
    return total


def render_retiming(retiming: RetimingMap, video: FrameSequence,
                    cfg: PipelineConfig, command=None, job_dir=None,
                    first_image=None) -> FrameSequence:
    if cfg.backend == "timewarp":
        return backend_timewarp(retiming, video, blend=cfg.blend)
    job = job_from_retiming(retiming, video, first_image=first_image)
    if cfg.backend == "hold":
        return backend_hold(job, video)
    if cfg.backend == "crossfade":
        return backend_crossfade(job, video)
    if cfg.backend == "external":
        if command is None or job_dir is None:
            raise ValueError("external backend needs a command and a job dir")
        return backend_external(job, video, job_dir, command)
    raise ValueError(f"unknown backend {cfg.backend!r}")


def run_pipeline(video: FrameSequence, audio: AudioTrack, cfg: PipelineConfig,
                 segment_seconds: float | None = None, command=None,
                 job_dir=None):
    """Full pipeline. Returns (beats, peaks, segments, output, report)."""
    beats = analyze_beats(audio, cfg)
    _, _, peaks = analyze_motion(video, cfg)
    segments = plan_segments(beats, peaks, video, cfg, segment_seconds)

    previous_last = None
    chunks = []
    for i, seg in enumerate(segments):
        seg_job_dir = None
        if job_dir is not None:
            seg_job_dir = job_dir if len(segments) == 1 else f"{job_dir}/seg{i:03d}"
        seg.rendered = render_retiming(seg.retiming, video, cfg,
                                       command=command, job_dir=seg_job_dir,
                                       first_image=previous_last)
        previous_last = seg.rendered.frames[-1]
        chunks.append(seg.rendered.frames)
    output = FrameSequence(frames=np.concatenate(chunks), fps=cfg.output_fps)

    _, _, rendered_peaks = analyze_motion(output, cfg)
    report = evaluate(beats, rendered_peaks, output, video,
                      sigma=cfg.beat_align_sigma, over=cfg.beat_align_over)
    return beats, peaks, segments, output, report
