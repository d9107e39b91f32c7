#!/usr/bin/env python3
"""Reproduce the shipped pretrained checkpoint.

Trains the denoiser on synthetic constant-velocity square clips with a
stepped learning-rate schedule. Seeded end to end; the result is the
checkpoint committed at checkpoints/pretrained.npz.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from avm_toy.data import make_dataset
from avm_toy.model import Denoiser, train_step
from avm_toy.nn import Adam
from avm_toy.schedule import DiffusionSchedule

PHASES = [(6000, 2e-3), (8000, 1e-3), (8000, 5e-4)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "checkpoints" / "pretrained.npz")
    ap.add_argument("--clips", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    schedule = DiffusionSchedule()
    rng = np.random.default_rng(args.seed)
    model = Denoiser(dtype=np.float32)
    data = make_dataset(args.clips, rng).astype(np.float32)

    optimizer = Adam(model.params, lr=PHASES[0][1])
    done = 0
    for steps, lr in PHASES:
        optimizer.lr = lr
        window = []
        for _ in range(steps):
            idx = rng.integers(0, len(data), 4)
            window.append(train_step(model, data[idx], schedule, rng,
                                     optimizer))
        done += steps
        print(f"step {done:6d}  lr {lr:.0e}  "
              f"loss100 {np.mean(window[-100:]):.4f}  "
              f"{(time.perf_counter() - t0) / 60:.1f} min", flush=True)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    model.save(args.out)
    print(f"saved {args.out}")


if __name__ == "__main__":
    main()
