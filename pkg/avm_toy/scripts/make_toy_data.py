#!/usr/bin/env python3
"""Write moving-square training clips as PNG-sequence directories, the
on-disk layout `avm-toy train --data` consumes."""

import argparse
from pathlib import Path

import numpy as np
from PIL import Image

from avm_toy.data import make_moving_square_clip, to_uint8


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--clips", type=int, default=64)
    ap.add_argument("--length", type=int, default=16)
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for k in range(args.clips):
        clip = make_moving_square_clip(rng, args.length, args.size)
        clip_dir = args.out_dir / f"clip_{k:04d}"
        clip_dir.mkdir(parents=True, exist_ok=True)
        for f in range(args.length):
            gray = to_uint8(clip[f, 0])
            rgb = np.repeat(gray[:, :, None], 3, axis=2)
            Image.fromarray(rgb, "RGB").save(clip_dir / f"{f + 1:06d}.png")
    print(f"wrote {args.clips} clips under {args.out_dir}")


if __name__ == "__main__":
    main()
