"""Forward diffusion: variance schedule and the noising process.

x^(t) = sqrt(alpha_bar_t) * x^(0) + sqrt(1 - alpha_bar_t) * eps, with a
linear beta schedule. Index 0 means "clean"; valid noising steps are 1..T.
"""

from dataclasses import dataclass, field

import numpy as np


class StepOutOfRange(ValueError):
    pass


@dataclass
class DiffusionSchedule:
    steps: int = 200
    beta_start: float = 1e-4
    beta_end: float = 0.02
    betas: np.ndarray = field(init=False, repr=False)
    alphas: np.ndarray = field(init=False, repr=False)
    alpha_bars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("need at least one diffusion step")
        self.betas = np.zeros(self.steps + 1)
        self.betas[1:] = np.linspace(self.beta_start, self.beta_end, self.steps)
        self.alphas = 1.0 - self.betas
        self.alpha_bars = np.cumprod(self.alphas)
        # cumprod of alphas[0] = 1 keeps index 0 exactly clean
        assert self.alpha_bars[0] == 1.0
        if np.any(np.diff(self.alpha_bars) >= 0):
            raise ValueError("alpha_bar must be strictly decreasing")
        if self.alpha_bars[-1] <= 0.0:
            raise ValueError("alpha_bar must stay positive")

    def check_step(self, t) -> None:
        t = np.asarray(t)
        if np.any(t < 1) or np.any(t > self.steps):
            raise StepOutOfRange(f"step {t} outside [1, {self.steps}]")


def forward_diffuse(x0: np.ndarray, t, schedule: DiffusionSchedule,
                    noise: np.ndarray) -> np.ndarray:
    """Noise a clean batch to step t (t may be per-sample)."""
    schedule.check_step(t)
    t = np.asarray(t)
    a_bar = schedule.alpha_bars[t]
    if a_bar.ndim:  # per-sample steps: broadcast over (B, L, C, H, W)
        a_bar = a_bar.reshape((-1,) + (1,) * (x0.ndim - 1))
    return np.sqrt(a_bar) * x0 + np.sqrt(1.0 - a_bar) * noise
