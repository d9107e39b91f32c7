import json
import stat
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from mvaa.io.frames import load_frames, save_frames
from mvaa.io.wav import save_wav_pcm16
from mvaa.synth import make_metronome, make_pulse_video

HOLD_STUB = textwrap.dedent("""\
    #!/usr/bin/env python3
    import json, sys
    from pathlib import Path
    from PIL import Image

    job_dir = Path(sys.argv[1])
    job = json.loads((job_dir / "job.json").read_text())
    cond = [(c["frame"], Image.open(job_dir / c["path"]).convert("RGB"))
            for c in job["conditioning"]]
    out = job_dir / "out"
    out.mkdir(exist_ok=True)
    for f in range(job["length"]):
        nearest = min(cond, key=lambda c: (abs(c[0] - f), c[0]))
        nearest[1].save(out / f"{f + 1:06d}.png")
""")


def mvaa(*args, env=None):
    return subprocess.run([sys.executable, "-m", "mvaa.cli", *args],
                          capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def media(tmp_path_factory):
    root = tmp_path_factory.mktemp("media")
    wav = root / "click.wav"
    save_wav_pcm16(make_metronome(120.0, 10.0), wav)
    video_dir = root / "video"
    save_frames(make_pulse_video(range(12, 192, 9), 192, fps=16.0), video_dir)
    return {"wav": wav, "video": video_dir, "root": root}


def test_beats_command_reports_click_tempo(media, tmp_path):
    out = tmp_path / "beats.json"
    proc = mvaa("beats", str(media["wav"]), "-o", str(out))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert abs(doc["bpm"] - 120.0) <= 2.0
    assert len(doc["beats"]) >= 15


def test_missing_file_exits_2():
    proc = mvaa("beats", "/nonexistent/file.wav")
    assert proc.returncode == 2
    assert proc.stderr.strip()


def test_invalid_bpm_range_exits_2(media):
    proc = mvaa("beats", str(media["wav"]), "--bpm-min", "200",
                "--bpm-max", "100")
    assert proc.returncode == 2


def test_motion_command_finds_pulse_peaks(media, tmp_path):
    out = tmp_path / "peaks.json"
    proc = mvaa("motion", str(media["video"]), "-o", str(out))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    frames = [p["frame"] for p in doc["peaks"]]
    assert frames == list(range(12, 192, 9))
    assert "energy" in doc and len(doc["energy"]) == 191


def test_single_frame_video_exits_3(tmp_path):
    from mvaa.io.frames import FrameSequence
    one = FrameSequence(frames=np.zeros((1, 8, 8, 3), np.uint8), fps=16.0)
    save_frames(one, tmp_path / "one")
    proc = mvaa("motion", str(tmp_path / "one"))
    assert proc.returncode == 3


def test_no_smooth_policy_exits_2(media):
    proc = mvaa("motion", str(media["video"]), "--no-smooth")
    assert proc.returncode == 2


def test_artifacts_are_byte_identical_across_reruns(media, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert mvaa("beats", str(media["wav"]), "-o", str(a)).returncode == 0
    assert mvaa("beats", str(media["wav"]), "-o", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_align_render_artifact_chain(media, tmp_path):
    beats, peaks = tmp_path / "beats.json", tmp_path / "peaks.json"
    plan, retime = tmp_path / "plan.json", tmp_path / "retime.json"
    assert mvaa("beats", str(media["wav"]), "-o", str(beats)).returncode == 0
    assert mvaa("motion", str(media["video"]), "-o", str(peaks)).returncode == 0
    proc = mvaa("align", str(beats), str(peaks), "-o", str(plan),
                "--retime", str(retime), "--video", str(media["video"]))
    assert proc.returncode == 0, proc.stderr

    from mvaa.io.plans import read_plan  # schema round trip
    assert read_plan(plan).K >= 15
    assert read_plan(retime).output_length == 160

    rendered = tmp_path / "rendered"
    proc = mvaa("render", str(media["video"]), str(retime), "-o", str(rendered))
    assert proc.returncode == 0, proc.stderr
    assert len(load_frames(rendered)) == 160


def test_run_timewarp_produces_synchronized_output(media, tmp_path):
    out_dir = tmp_path / "out"
    proc = mvaa("run", str(media["video"]), str(media["wav"]),
                "-o", str(out_dir))
    assert proc.returncode == 0, proc.stderr
    report = json.loads((out_dir / "report.json").read_text())
    assert report["beat_align"] >= 0.9
    assert report["cp"]["exact_match_rate"] == 1.0
    frames = load_frames(out_dir / "frames")
    assert len(frames) == 160
    # every artifact written is loadable by the matching reader
    from mvaa.io.plans import beats_from_dict, read_plan
    beats_from_dict(json.loads((out_dir / "beats.json").read_text()))
    read_plan(out_dir / "plan.json")
    read_plan(out_dir / "retime.json")


def test_run_hold_backend_preserves_frames_exactly(media, tmp_path):
    out_dir = tmp_path / "hold"
    proc = mvaa("run", str(media["video"]), str(media["wav"]),
                "-o", str(out_dir), "--backend", "hold")
    assert proc.returncode == 0, proc.stderr
    report = json.loads((out_dir / "report.json").read_text())
    assert report["cp"]["exact_match_rate"] == 1.0


def test_run_external_stub_matches_hold_backend(media, tmp_path):
    stub = tmp_path / "stub.py"
    stub.write_text(HOLD_STUB)
    stub.chmod(stub.stat().st_mode | stat.S_IXUSR)

    hold_dir, ext_dir = tmp_path / "hold", tmp_path / "ext"
    assert mvaa("run", str(media["video"]), str(media["wav"]), "-o",
                str(hold_dir), "--backend", "hold").returncode == 0
    proc = mvaa("run", str(media["video"]), str(media["wav"]), "-o",
                str(ext_dir), "--backend", "external", "--command", str(stub))
    assert proc.returncode == 0, proc.stderr
    a = load_frames(hold_dir / "frames")
    b = load_frames(ext_dir / "frames")
    assert np.array_equal(a.frames, b.frames)


def test_run_external_without_command_exits_2(media, tmp_path):
    proc = mvaa("run", str(media["video"]), str(media["wav"]),
                "-o", str(tmp_path / "x"), "--backend", "external")
    assert proc.returncode == 2


def test_eval_command(media, tmp_path):
    out_dir = tmp_path / "out"
    assert mvaa("run", str(media["video"]), str(media["wav"]), "-o",
                str(out_dir)).returncode == 0
    report = tmp_path / "report.json"
    proc = mvaa("eval", str(out_dir / "frames"), "--source",
                str(media["video"]), "--beats", str(out_dir / "beats.json"),
                "-o", str(report))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(report.read_text())
    assert doc["beat_align"] >= 0.9
    assert doc == json.loads((out_dir / "report.json").read_text())


def test_segmented_run_is_seamless(media, tmp_path):
    out_dir = tmp_path / "seg"
    proc = mvaa("run", str(media["video"]), str(media["wav"]), "-o",
                str(out_dir), "--segment-seconds", "4")
    assert proc.returncode == 0, proc.stderr
    frames = load_frames(out_dir / "frames")
    # 4 s + 4 s + 2 s at 16 fps
    assert len(frames) == 64 + 64 + 32
    # the first frame of each later segment equals the last frame of the
    # previous one (the chaining contract)
    for boundary in (64, 128):
        assert np.array_equal(frames.frames[boundary - 1],
                              frames.frames[boundary])
    assert (out_dir / "plan_000.json").is_file()
    assert (out_dir / "retime_002.json").is_file()
    report = json.loads((out_dir / "report.json").read_text())
    assert report["beat_align"] >= 0.8


def test_config_file_with_unknown_key_exits_2(media, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"no_such_setting": 5}')
    proc = mvaa("--config", str(cfg), "beats", str(media["wav"]))
    assert proc.returncode == 2
