"""Synthetic audio/video generators for demos and ground-truth testing.

Everything here is deterministic: click tracks place short broadband bursts
at known times, pulse videos move a bright square at known frames, so the
analysis stages can be checked against exact ground truth.
"""

import numpy as np

from .io.frames import FrameSequence
from .io.wav import AudioTrack


def make_click_track(click_times, duration: float, sample_rate: int = 22050,
                     amplitude: float = 0.9, click_ms: float = 3.0) -> AudioTrack:
    """Silence with a decaying broadband burst at each requested time."""
    n = int(round(duration * sample_rate))
    samples = np.zeros(n)
    burst_len = max(3, int(sample_rate * click_ms / 1000.0))
    t = np.arange(burst_len)
    burst = amplitude * np.cos(np.pi * t / 2.0) * np.exp(-t / (burst_len / 3.0))
    for ct in click_times:
        start = int(round(ct * sample_rate))
        stop = min(start + burst_len, n)
        if start < n:
            samples[start:stop] += burst[:stop - start]
    return AudioTrack(samples=np.clip(samples, -1.0, 1.0),
                      sample_rate=sample_rate)


def make_metronome(bpm: float, duration: float, sample_rate: int = 22050,
                   first_click: float = 0.5) -> AudioTrack:
    period = 60.0 / bpm
    times = np.arange(first_click, duration - 0.01, period)
    return AudioTrack(
        samples=make_click_track(times, duration, sample_rate).samples,
        sample_rate=sample_rate)


def make_pulse_video(pulse_frames, length: int, fps: float = 16.0,
                     size: int = 64, square: int = 8) -> FrameSequence:
    """Static dark scene; a bright square jumps to a new spot at each pulse
    frame, creating one motion-energy impulse per pulse."""
    pulse_frames = sorted(set(int(p) for p in pulse_frames))
    if any(p < 1 or p >= length for p in pulse_frames):
        raise ValueError("pulse frames must lie in [1, length-1]")
    positions = [(4, 4)]
    for k in range(len(pulse_frames)):
        row = 4 + ((k + 1) * 11) % (size - square - 8)
        col = 4 + ((k + 1) * 17) % (size - square - 8)
        positions.append((row, col))

    frames = np.full((length, size, size, 3), 16, dtype=np.uint8)
    segment = 0
    for f in range(length):
        if segment < len(pulse_frames) and f >= pulse_frames[segment]:
            segment += 1
        r, c = positions[segment]
        frames[f, r:r + square, c:c + square] = 230
    return FrameSequence(frames=frames, fps=fps)


def make_moving_square_video(length: int, fps: float = 16.0, size: int = 64,
                             square: int = 10, start: int = 4,
                             step: float = 2.0) -> FrameSequence:
    """A square drifting horizontally at constant speed (smooth motion)."""
    frames = np.full((length, size, size, 3), 16, dtype=np.uint8)
    for f in range(length):
        col = int(round(start + step * f)) % (size - square)
        frames[f, size // 3:size // 3 + square, col:col + square] = 230
    return FrameSequence(frames=frames, fps=fps)
