"""Training drivers: multi-clip pretraining, single-clip fine-tuning, and
the masked-reconstruction probe used to measure adaptation."""

import numpy as np

from .masking import VisibleMask
from .model import Denoiser, train_step
from .nn import Adam
from .sampler import sample_clip
from .schedule import DiffusionSchedule


def train(model: Denoiser, dataset: np.ndarray, steps: int,
          schedule: DiffusionSchedule, batch_size: int = 4, lr: float = 2e-3,
          seed: int = 0, log_every: int = 0) -> list[float]:
    """SGD over random clips; returns the per-step loss curve."""
    rng = np.random.default_rng(seed)
    optimizer = Adam(model.params, lr=lr)
    losses = []
    for step in range(steps):
        idx = rng.integers(0, len(dataset), size=batch_size)
        loss = train_step(model, dataset[idx], schedule, rng, optimizer)
        losses.append(loss)
        if log_every and (step + 1) % log_every == 0:
            window = np.mean(losses[-log_every:])
            print(f"step {step + 1:5d}  loss {window:.4f}")
    return losses


def finetune(model: Denoiser, clip: np.ndarray, steps: int,
             schedule: DiffusionSchedule, batch_size: int = 4,
             lr: float = 1e-3, seed: int = 1) -> Denoiser:
    """Continue training on a single clip; 0 steps returns the model as is."""
    tuned = model.copy()
    if steps <= 0:
        return tuned
    rng = np.random.default_rng(seed)
    optimizer = Adam(tuned.params, lr=lr)
    batch = np.repeat(clip[None], batch_size, axis=0)
    for _ in range(steps):
        train_step(tuned, batch, schedule, rng, optimizer)
    return tuned


def reconstruction_mse(model: Denoiser, clip: np.ndarray,
                       schedule: DiffusionSchedule,
                       visible_indices=(0, 5, 10, 15), seed: int = 7) -> float:
    """Complete the clip from a fixed visible set and score the masked
    frames against ground truth (pixel MSE in [-1, 1] units)."""
    rng = np.random.default_rng(seed)
    frames = clip[:, 0]
    visible = VisibleMask(
        visible_indices=np.asarray(visible_indices, dtype=np.int64),
        length=model.frames)
    clean = np.where(visible.as_channel()[:, None, None] > 0, frames, 0.0)
    result = sample_clip(model, schedule, visible, clean, rng)
    hidden = np.setdiff1d(np.arange(model.frames), visible.visible_indices)
    return float(((result[hidden] - frames[hidden]) ** 2).mean())
