"""Ancestral DDPM sampling with visible-frame clamping, and the completion
entry point that serves a whole job directory.

Jobs longer than the model's clip length are generated window by window:
each new window starts on the previous window's final generated frame
(conditioned as visible), which chains arbitrarily long outputs.
"""

import numpy as np

from .data import box_resize, gray_from_rgb, nearest_resize, to_uint8, \
    to_unit_range
from .jobs import CompletionRequest, read_job, write_output
from .masking import VisibleMask
from .model import Denoiser
from .schedule import DiffusionSchedule


def _conditional_prior(visible: VisibleMask, clean_frames: np.ndarray,
                       length: int) -> np.ndarray:
    """Crude clean-content guess per frame: the time-weighted mix of the
    surrounding visible frames (plain hold outside the anchored span)."""
    guess = np.zeros((length,) + clean_frames.shape[1:])
    vis = visible.visible_indices
    if not len(vis):
        return guess
    for f in range(length):
        before = vis[vis <= f]
        after = vis[vis >= f]
        p = before[-1] if len(before) else after[0]
        n = after[0] if len(after) else before[-1]
        lam = (f - p) / (n - p) if n > p else 0.0
        guess[f] = (1.0 - lam) * clean_frames[p] + lam * clean_frames[n]
    return guess


def sample_clip(model: Denoiser, schedule: DiffusionSchedule,
                visible: VisibleMask, clean_frames: np.ndarray,
                rng: np.random.Generator) -> np.ndarray:
    """Generate one clip (L, H, W) given clean content for visible frames.

    The schedule keeps a substantial signal fraction at t = T
    (alpha_bar_T is far from zero at 200 steps), so sampling starts from
    the forward marginal of a conditional prior guess rather than pure
    noise; the reverse process from T to 1 is plain ancestral DDPM."""
    l, h, w = model.frames, model.size, model.size
    flags = visible.as_channel()[None, :]  # batch of one
    clean = clean_frames[None]
    vis = visible.visible_indices

    prior = _conditional_prior(visible, clean_frames, l)
    a_bar_t = schedule.alpha_bars[schedule.steps]
    x = (np.sqrt(a_bar_t) * prior[None]
         + np.sqrt(1.0 - a_bar_t) * rng.standard_normal((1, l, h, w))
         ).astype(model.dtype)
    x[0, vis] = clean[0, vis]  # visible frames are pinned to clean content
    for t in range(schedule.steps, 0, -1):
        net_in = model.build_input(x, flags, clean, np.array([t]), schedule)
        eps = model.forward(net_in)
        alpha = schedule.alphas[t]
        a_bar = schedule.alpha_bars[t]
        mean = (x - schedule.betas[t] / np.sqrt(1.0 - a_bar) * eps) \
            / np.sqrt(alpha)
        if t > 1:
            a_bar_prev = schedule.alpha_bars[t - 1]
            var = (1.0 - a_bar_prev) / (1.0 - a_bar) * schedule.betas[t]
            x = mean + np.sqrt(var) * rng.standard_normal(mean.shape)
        else:
            x = mean
        x[0, vis] = clean[0, vis]
    return np.clip(x[0], -1.0, 1.0)


def complete_request(job: CompletionRequest, model: Denoiser,
                     schedule: DiffusionSchedule,
                     seed: int = 0) -> list[np.ndarray]:
    """Fill in every frame of a job; returns full-resolution RGB frames."""
    rng = np.random.default_rng(seed)
    l = model.frames
    cond_small = {idx: to_unit_range(box_resize(gray_from_rgb(img),
                                                model.size, model.size))
                  for idx, img in job.conditioning}

    generated = np.zeros((job.length, model.size, model.size))
    have = np.zeros(job.length, dtype=bool)

    start = 0
    while True:
        window_frames = np.full((l, model.size, model.size), -1.0)
        visible = []
        for rel in range(l):
            absolute = start + rel
            if absolute >= job.length:
                break  # frames past the job are generated freely, then dropped
            if absolute in cond_small:
                visible.append(rel)
                window_frames[rel] = cond_small[absolute]
            elif have[absolute]:
                visible.append(rel)
                window_frames[rel] = generated[absolute]
        mask = VisibleMask(visible_indices=np.asarray(visible, dtype=np.int64),
                           length=l)
        clip = sample_clip(model, schedule, mask, window_frames, rng)
        stop = min(start + l, job.length)
        generated[start:stop] = clip[:stop - start]
        have[start:stop] = True
        if stop >= job.length:
            break
        start = stop - 1  # overlap one frame so the next window chains on it

    frames = []
    for idx in range(job.length):
        if idx in cond_small:
            original = dict(job.conditioning)[idx]
            frames.append(original.copy())  # verbatim, bit-exact
        else:
            small = to_uint8(generated[idx])
            big = nearest_resize(small, job.height, job.width)
            frames.append(np.repeat(big[:, :, None], 3, axis=2))
    return frames


def complete_job_dir(job_dir, model: Denoiser, schedule: DiffusionSchedule,
                     seed: int = 0):
    job = read_job(job_dir)
    frames = complete_request(job, model, schedule, seed=seed)
    return write_output(job, frames)
