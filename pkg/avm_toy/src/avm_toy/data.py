"""Toy video clips: synthetic moving squares and PNG-directory loading.

Clips are arrays shaped (L, 1, H, W) with values in [-1, 1]; batches stack
them to (B, L, 1, H, W).
"""

import re
from pathlib import Path

import numpy as np
from PIL import Image


def make_moving_square_clip(rng: np.random.Generator, length: int = 16,
                            size: int = 32, square: int = 8) -> np.ndarray:
    """One clip of a bright square drifting at constant velocity.

    Trajectories never touch the walls, so any two frames of a clip
    determine every frame in between: completion from sparse anchors has
    a unique answer, which is what makes the toy task learnable."""
    span = size - square
    vel = rng.uniform(-2.0, 2.0, size=2)
    while np.hypot(*vel) < 0.5:  # reject near-static squares
        vel = rng.uniform(-2.0, 2.0, size=2)
    travel = vel * (length - 1)
    lo = np.maximum(0.0, -travel)
    hi = np.minimum(span, span - travel)
    if np.any(lo > hi):  # too fast to stay inside: damp to the feasible range
        vel = vel * np.minimum(1.0, span / (np.abs(travel) + 1e-9))
        travel = vel * (length - 1)
        lo = np.maximum(0.0, -travel)
        hi = np.minimum(span, span - travel)
    pos = rng.uniform(lo, hi)
    clip = np.full((length, 1, size, size), -1.0)
    for f in range(length):
        p = pos + vel * f
        r, c = int(round(p[0])), int(round(p[1]))
        clip[f, 0, r:r + square, c:c + square] = 1.0
    return clip


def make_dataset(n_clips: int, rng: np.random.Generator,
                 length: int = 16, size: int = 32) -> np.ndarray:
    return np.stack([make_moving_square_clip(rng, length, size)
                     for _ in range(n_clips)])


def sample_batch(dataset: np.ndarray, batch: int,
                 rng: np.random.Generator) -> np.ndarray:
    idx = rng.integers(0, len(dataset), size=batch)
    return dataset[idx]


# -- image helpers ------------------------------------------------------------

def box_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bin-mean resize for arbitrary ratios (exact box average when the
    sizes divide evenly); bins are never empty, so upsampling works too."""
    h, w = img.shape[:2]
    rows = [(h * i // out_h, max(h * (i + 1) // out_h, h * i // out_h + 1))
            for i in range(out_h)]
    cols = [(w * j // out_w, max(w * (j + 1) // out_w, w * j // out_w + 1))
            for j in range(out_w)]
    out = np.empty((out_h, out_w), dtype=np.float64)
    for i, (r0, r1) in enumerate(rows):
        band = img[r0:r1]
        for j, (c0, c1) in enumerate(cols):
            out[i, j] = band[:, c0:c1].mean()
    return out


def nearest_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = img.shape[:2]
    ri = np.minimum((np.arange(out_h) * h) // out_h, h - 1)
    ci = np.minimum((np.arange(out_w) * w) // out_w, w - 1)
    return img[ri][:, ci]


def gray_from_rgb(rgb: np.ndarray) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64).mean(axis=2)


def to_unit_range(gray_0_255: np.ndarray) -> np.ndarray:
    return gray_0_255 / 127.5 - 1.0


def to_uint8(unit: np.ndarray) -> np.ndarray:
    return np.clip(np.floor((unit + 1.0) * 127.5 + 0.5), 0, 255).astype(np.uint8)


_PNG_NAME = re.compile(r"^(\d+)\.png$")


def load_clip_dir(path, length: int = 16, size: int = 32) -> np.ndarray:
    """PNG-sequence directory -> (length, 1, size, size) clip in [-1, 1].

    Shorter sequences are padded by holding the final frame."""
    path = Path(path)
    entries = sorted((int(m.group(1)), name) for name in
                     (p.name for p in path.iterdir())
                     if (m := _PNG_NAME.match(name)))
    if not entries:
        raise FileNotFoundError(f"no numbered PNG frames in {path}")
    frames = []
    for _, name in entries[:length]:
        with Image.open(path / name) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
        frames.append(to_unit_range(box_resize(gray_from_rgb(rgb), size, size)))
    while len(frames) < length:
        frames.append(frames[-1])
    return np.stack(frames)[:, None]
