#!/usr/bin/env python3
"""Probe a checkpoint's completion quality: condition two frames of a
constant-velocity square and report how faithfully the generated frames
track the true path."""

import argparse

import numpy as np

from avm_toy.masking import VisibleMask
from avm_toy.model import Denoiser
from avm_toy.sampler import sample_clip
from avm_toy.schedule import DiffusionSchedule


def straight_clip(vel=4.0 / 3.0, start=4.0, length=16, size=32, square=8):
    clip = np.full((length, 1, size, size), -1.0, dtype=np.float32)
    for f in range(length):
        c = int(round(start + vel * f))
        clip[f, 0, 12:12 + square, c:c + square] = 1.0
    return clip


def centroids(frames):
    cols = np.arange(frames.shape[-1])[None, :]
    out = []
    for frame in frames:
        lit = frame > 0.0
        out.append((lit * cols).sum() / max(lit.sum(), 1))
    return np.array(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ckpt")
    ap.add_argument("--anchors", type=int, nargs="+", default=[0, 15])
    ap.add_argument("--seeds", type=int, nargs="+", default=[3, 4, 5])
    args = ap.parse_args()

    model = Denoiser.load(args.ckpt)
    schedule = DiffusionSchedule()
    clip = straight_clip(length=model.frames)
    visible = VisibleMask(visible_indices=np.array(args.anchors),
                          length=model.frames)
    clean = np.where(visible.as_channel()[:, None, None] > 0,
                     clip[:, 0], 0.0).astype(np.float32)
    truth = centroids(clip[:, 0])

    for seed in args.seeds:
        out = sample_clip(model, schedule, visible, clean,
                          np.random.default_rng(seed))
        got = centroids(out)
        mono = bool(np.all(np.diff(got) > -1.0))
        err = np.abs(got - truth).max()
        print(f"seed {seed}: monotone={mono} max_err={err:5.2f}px  "
              f"path={[round(c, 1) for c in got]}")
    print(f"truth:              path={[round(c, 1) for c in truth]}")


if __name__ == "__main__":
    main()
