import os
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvaa.align import AlignmentPlan, RetimingMap
from mvaa.audio import BeatGrid
from mvaa.errors import (
    CorruptHeader,
    EmptySequence,
    IoFailure,
    MissingFpsSidecar,
    MixedDimensions,
    SchemaMismatch,
    UnsupportedFormat,
)
from mvaa.io.frames import FrameSequence, _rgb_to_ycbcr, load_frames, save_frames
from mvaa.io.plans import (
    beats_from_dict,
    beats_to_dict,
    peaks_from_dict,
    peaks_to_dict,
    read_plan,
    write_plan,
)
from mvaa.io.wav import AudioTrack, load_wav, save_wav_pcm16
from mvaa.motion import PeakSet


def write_pcm16(path, samples, sample_rate=22050, channels=1):
    pcm = np.asarray(samples, dtype="<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, channels, sample_rate,
                                    sample_rate * 2 * channels, 2 * channels, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    path.write_bytes(header + pcm)


# -- WAV --------------------------------------------------------------------

def test_pcm16_scaling(tmp_path):
    path = tmp_path / "t.wav"
    write_pcm16(path, [0, -32768, 32767, 16384])
    track = load_wav(path)
    assert track.samples[0] == 0.0
    assert track.samples[1] == -1.0
    assert track.samples[2] == 32767 / 32768.0
    assert track.samples[3] == 0.5


def test_second_of_silence(tmp_path):
    path = tmp_path / "s.wav"
    write_pcm16(path, np.zeros(22050, dtype=np.int16))
    track = load_wav(path)
    assert len(track.samples) == 22050
    assert track.sample_rate == 22050
    assert not track.samples.any()


def test_stereo_collapses_to_channel_mean(tmp_path):
    path = tmp_path / "st.wav"
    write_pcm16(path, np.array([16384, -16384, 8192, 8192], dtype=np.int16),
                channels=2)
    track = load_wav(path)
    assert track.samples == pytest.approx([0.0, 0.25])


def test_float32_wav(tmp_path):
    payload = np.array([0.5, -0.25, 1.0], dtype="<f4").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 3, 1, 8000, 32000, 4, 32)
    header += b"data" + struct.pack("<I", len(payload))
    path = tmp_path / "f.wav"
    path.write_bytes(header + payload)
    track = load_wav(path)
    assert track.samples == pytest.approx([0.5, -0.25, 1.0])


def test_load_wav_deterministic(tmp_path):
    path = tmp_path / "d.wav"
    write_pcm16(path, np.arange(-100, 100, dtype=np.int16))
    a, b = load_wav(path), load_wav(path)
    assert np.array_equal(a.samples, b.samples)


def test_unsupported_codec_rejected(tmp_path):
    payload = b"\x00" * 8
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 2, 1, 8000, 8000, 1, 8)
    header += b"data" + struct.pack("<I", len(payload))
    path = tmp_path / "adpcm.wav"
    path.write_bytes(header + payload)
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_corrupt_riff_rejected(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"RIFX\x00\x00\x00\x00WAVE")
    with pytest.raises(CorruptHeader):
        load_wav(path)


def test_truncated_chunk_rejected(tmp_path):
    header = b"RIFF" + struct.pack("<I", 100) + b"WAVE"
    header += b"fmt " + struct.pack("<I", 1000)  # declares more than exists
    path = tmp_path / "trunc.wav"
    path.write_bytes(header)
    with pytest.raises(CorruptHeader):
        load_wav(path)


def test_wav_writer_reader_round_trip(tmp_path):
    track = AudioTrack(samples=np.sin(np.linspace(0, 20, 4000)) * 0.8,
                       sample_rate=16000)
    path = tmp_path / "rt.wav"
    save_wav_pcm16(track, path)
    back = load_wav(path)
    assert back.sample_rate == 16000
    assert np.abs(back.samples - track.samples).max() < 1.0 / 32768


# -- PNG sequences -----------------------------------------------------------

def random_video(rng, l=3, h=32, w=48, fps=16.0):
    return FrameSequence(frames=rng.integers(0, 256, (l, h, w, 3), dtype=np.uint8),
                         fps=fps)


def test_png_round_trip_is_identity(tmp_path):
    video = random_video(np.random.default_rng(0))
    save_frames(video, tmp_path / "seq")
    back = load_frames(tmp_path / "seq")
    assert np.array_equal(back.frames, video.frames)
    assert back.fps == video.fps


def test_single_frame_directory_contents(tmp_path):
    video = random_video(np.random.default_rng(1), l=1)
    save_frames(video, tmp_path / "one")
    assert sorted(os.listdir(tmp_path / "one")) == ["000001.png", "fps.txt"]


def test_png_dir_numeric_ordering(tmp_path, monkeypatch):
    video = random_video(np.random.default_rng(2), l=12)
    save_frames(video, tmp_path / "seq")
    # renaming 000010 to 10 must not change its position
    os.rename(tmp_path / "seq" / "000010.png", tmp_path / "seq" / "10.png")
    back = load_frames(tmp_path / "seq")
    assert np.array_equal(back.frames, video.frames)


def test_mixed_dimensions_rejected(tmp_path):
    d = tmp_path / "mix"
    d.mkdir()
    from mvaa.io.frames import write_png
    write_png(np.zeros((64, 64, 3), np.uint8), d / "000001.png")
    write_png(np.zeros((32, 32, 3), np.uint8), d / "000002.png")
    (d / "fps.txt").write_text("16")
    with pytest.raises(MixedDimensions):
        load_frames(d)


def test_empty_sequence_rejected(tmp_path):
    d = tmp_path / "empty"
    d.mkdir()
    (d / "fps.txt").write_text("16")
    with pytest.raises(EmptySequence):
        load_frames(d)


def test_missing_fps_sidecar_rejected(tmp_path):
    d = tmp_path / "nofps"
    d.mkdir()
    from mvaa.io.frames import write_png
    write_png(np.zeros((8, 8, 3), np.uint8), d / "000001.png")
    with pytest.raises(MissingFpsSidecar):
        load_frames(d)


def test_unwritable_destination_raises_iofailure(tmp_path):
    video = random_video(np.random.default_rng(3), l=1)
    blocker = tmp_path / "blocker"
    blocker.write_text("plain file, not a directory")
    with pytest.raises(IoFailure):
        save_frames(video, blocker / "seq")


# -- y4m ---------------------------------------------------------------------

def test_y4m_header_and_length(tmp_path):
    video = random_video(np.random.default_rng(4), l=3, h=64, w=64)
    path = tmp_path / "v.y4m"
    save_frames(video, path)
    header = path.read_bytes().split(b"\n", 1)[0]
    assert b"W64" in header and b"H64" in header and b"F16:1" in header
    back = load_frames(path)
    assert len(back) == 3
    assert back.fps == 16.0
    assert (back.height, back.width) == (64, 64)


@pytest.mark.parametrize("maker", ["gray", "blocks"])
def test_y4m_luma_round_trip_within_one(tmp_path, maker):
    rng = np.random.default_rng(5)
    if maker == "gray":
        ramp = np.linspace(0, 255, 64).astype(np.uint8)
        frame = np.repeat(np.tile(ramp, (64, 1))[:, :, None], 3, axis=2)
        frames = np.stack([frame, frame[::-1]])
    else:
        frames = rng.integers(0, 256, (2, 32, 32, 3), dtype=np.uint8) \
            .repeat(2, 1).repeat(2, 2)
    video = FrameSequence(frames=frames, fps=8.0)
    path = tmp_path / "v.y4m"
    save_frames(video, path)
    back = load_frames(path)
    for f1, f2 in zip(video.frames, back.frames):
        y1 = _rgb_to_ycbcr(f1)[0].astype(int)
        y2 = _rgb_to_ycbcr(f2)[0].astype(int)
        assert np.abs(y1 - y2).max() <= 1


def test_y4m_rejects_odd_dimensions(tmp_path):
    video = FrameSequence(frames=np.zeros((1, 15, 16, 3), np.uint8), fps=8.0)
    with pytest.raises(UnsupportedFormat):
        save_frames(video, tmp_path / "odd.y4m")


def test_y4m_rejects_non_420(tmp_path):
    path = tmp_path / "c444.y4m"
    path.write_bytes(b"YUV4MPEG2 W2 H2 F8:1 C444\nFRAME\n" + b"\x00" * 12)
    with pytest.raises(UnsupportedFormat):
        load_frames(path)


def test_y4m_truncated_frame_rejected(tmp_path):
    path = tmp_path / "short.y4m"
    path.write_bytes(b"YUV4MPEG2 W4 H4 F8:1 C420\nFRAME\n" + b"\x00" * 5)
    with pytest.raises(CorruptHeader):
        load_frames(path)


# -- plan / artifact JSON -----------------------------------------------------

def test_plan_round_trip(tmp_path):
    plan = AlignmentPlan(pairs=[(0.5, 0.45, 7)], total_cost=abs(0.5 - 0.45),
                         source_fps=16.0, music_duration=2.0)
    path = tmp_path / "plan.json"
    write_plan(plan, path)
    back = read_plan(path)
    assert back == plan


def test_empty_plan_is_valid(tmp_path):
    plan = AlignmentPlan(pairs=[], total_cost=0.0, source_fps=16.0,
                         music_duration=1.0)
    path = tmp_path / "plan.json"
    write_plan(plan, path)
    back = read_plan(path)
    assert back.K == 0


def test_retiming_round_trip(tmp_path):
    retime = RetimingMap(anchors=[(0, 0.0), (8, 0.4), (23, 1.2)],
                         output_length=24, output_fps=16.0)
    path = tmp_path / "retime.json"
    write_plan(retime, path)
    assert read_plan(path) == retime


def test_retiming_missing_fps_is_schema_mismatch(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"length": 4, "anchors": [{"frame": 0, "source_time": 0.0},'
                    '{"frame": 3, "source_time": 1.0}]}')
    with pytest.raises(SchemaMismatch):
        read_plan(path)


def test_unrecognized_document_is_schema_mismatch(tmp_path):
    path = tmp_path / "odd.json"
    path.write_text('{"stuff": 1}')
    with pytest.raises(SchemaMismatch):
        read_plan(path)


def test_beats_and_peaks_round_trip():
    grid = BeatGrid(beats=[0.51, 1.02, 1.49], bpm=119.5, duration=2.0)
    back = beats_from_dict(beats_to_dict(grid))
    assert np.array_equal(back.beats, grid.beats)
    assert (back.bpm, back.duration) == (grid.bpm, grid.duration)
    peaks = PeakSet(peak_times=[0.375, 0.8125], peak_frames=[6, 13],
                    peak_values=[3.5, 2.25], fps=16.0)
    back = peaks_from_dict(peaks_to_dict(peaks, energy=[0.0, 1.0]))
    assert np.array_equal(back.peak_times, peaks.peak_times)
    assert np.array_equal(back.peak_frames, peaks.peak_frames)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 100.0), st.floats(0.0, 100.0)),
                min_size=0, max_size=12))
def test_plan_round_trip_arbitrary_floats(tmp_path_factory, raw):
    # build a strictly increasing pair list from arbitrary float soup
    pairs = []
    b_prev = v_prev = -1.0
    for db, dv in raw:
        b_prev += db + 1e-3
        v_prev += dv + 1e-3
        pairs.append((b_prev, v_prev, len(pairs) + 1))
    cost = 0.0
    for b, v, _ in pairs:
        cost += abs(b - v)
    plan = AlignmentPlan(pairs=pairs, total_cost=cost, source_fps=16.0,
                         music_duration=max((p[0] for p in pairs), default=1.0) + 1)
    path = tmp_path_factory.mktemp("plans") / "p.json"
    write_plan(plan, path)
    back = read_plan(path)
    assert back == plan  # exact float round trip, field for field
