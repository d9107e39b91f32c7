#!/usr/bin/env python3
"""Synthesize a demo music track and video.

Writes click.wav (120 BPM metronome) and video/ (a 16 fps clip whose motion
pulses are deliberately offset from the beat grid) into the target
directory, ready for `mvaa run`.
"""

import argparse
from pathlib import Path

from mvaa.io.frames import save_frames
from mvaa.io.wav import save_wav_pcm16
from mvaa.synth import make_metronome, make_pulse_video


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--bpm", type=float, default=120.0)
    ap.add_argument("--seconds", type=float, default=10.0)
    ap.add_argument("--fps", type=float, default=16.0)
    ap.add_argument("--pulse-every", type=int, default=9,
                    help="frames between motion pulses")
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_wav_pcm16(make_metronome(args.bpm, args.seconds),
                   args.out_dir / "click.wav")
    length = int(args.seconds * args.fps * 1.2)
    video = make_pulse_video(range(12, length, args.pulse_every), length,
                             fps=args.fps)
    save_frames(video, args.out_dir / "video")
    print(f"wrote {args.out_dir}/click.wav and {args.out_dir}/video/ "
          f"({length} frames at {args.fps} fps)")


if __name__ == "__main__":
    main()
