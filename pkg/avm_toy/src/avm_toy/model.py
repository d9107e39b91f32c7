"""Frame-conditioned denoiser: a small two-level U-Net over the whole clip.

All frames enter as channels, so every output frame can attend to every
conditioning frame. Input channels per clip of length L:

  * L noisy frames with clean content composited at visible positions,
  * L visibility planes,
  * L clean-where-visible planes,
  * L nearest-previous-anchor planes and L nearest-next-anchor planes,
  * L interpolation-weight planes (each frame's fractional position
    between its surrounding anchors),
  * 2 time channels (sin/cos of the diffusion step) and 2 coordinate ramps.

The anchor/weight/coordinate planes carry no new information (they are
derived from the mask and the clean frames) but hand the network the
geometry it needs to place content between sparse anchors at desk scale.
The final layer starts at zero, so an untrained model predicts zero noise.
"""

import json

import numpy as np

from . import nn
from .masking import VisibleMask
from .schedule import DiffusionSchedule, forward_diffuse


class Denoiser:
    def __init__(self, frames: int = 16, size: int = 32, base: int = 32,
                 seed: int = 0, dtype=np.float64):
        if size % 4:
            raise ValueError("size must be divisible by 4 (two pooling levels)")
        self.frames = frames
        self.size = size
        self.base = base
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        cin = frames * 6 + 4
        mid = base + base // 2
        deep = base * 2
        zeros = lambda n: np.zeros(n, dtype=self.dtype)
        self.params = {
            "w1": nn.he_init(rng, base, cin, self.dtype), "b1": zeros(base),
            "w2": nn.he_init(rng, base, base, self.dtype), "b2": zeros(base),
            "w3": nn.he_init(rng, mid, base, self.dtype), "b3": zeros(mid),
            "w4": nn.he_init(rng, mid, mid, self.dtype), "b4": zeros(mid),
            "w5": nn.he_init(rng, deep, mid, self.dtype), "b5": zeros(deep),
            "w6": nn.he_init(rng, deep, deep, self.dtype), "b6": zeros(deep),
            "w7": nn.he_init(rng, mid, mid + deep, self.dtype), "b7": zeros(mid),
            "w8": nn.he_init(rng, base, base + mid, self.dtype), "b8": zeros(base),
            "w9": np.zeros((frames, base, 3, 3), dtype=self.dtype),
            "b9": zeros(frames),
        }

    # -- input assembly ------------------------------------------------------

    def build_input(self, noisy, visible_flags, clean, t,
                    schedule: DiffusionSchedule):
        """(B, L, H, W) noisy frames + per-frame visibility + clean frames
        -> (B, 6L+4, H, W) network input.

        Clean content is composited into the noisy channel at visible
        positions, exactly matching how sampling clamps those frames, so
        training and generation see the same input distribution."""
        b, l, h, w = noisy.shape
        flags = visible_flags[:, :, None, None].astype(self.dtype)
        planes = np.broadcast_to(flags, (b, l, h, w))
        vis_clean = clean * planes
        composited = noisy * (1.0 - planes) + vis_clean

        prev_anchor = np.zeros((b, l, h, w), dtype=self.dtype)
        next_anchor = np.zeros((b, l, h, w), dtype=self.dtype)
        weight = np.zeros((b, l, 1, 1), dtype=self.dtype)
        for bi in range(b):
            vis = np.flatnonzero(visible_flags[bi])
            if not len(vis):
                continue
            for f in range(l):
                before = vis[vis <= f]
                after = vis[vis >= f]
                p = before[-1] if len(before) else after[0]
                n = after[0] if len(after) else before[-1]
                prev_anchor[bi, f] = clean[bi, p]
                next_anchor[bi, f] = clean[bi, n]
                if n > p:
                    weight[bi, f] = (f - p) / (n - p)
        weight_planes = np.broadcast_to(weight, (b, l, h, w))

        # half-period phase: cos runs 1 -> -1 monotonically over [0, T], so
        # the step is uniquely and separably encoded (a full-period phase
        # would alias t ~ T onto t ~ 0, collapsing the two noise regimes)
        phase = np.pi * np.asarray(t, dtype=self.dtype) / schedule.steps
        phase = phase.reshape(b, 1, 1, 1)
        time_planes = np.concatenate([
            np.broadcast_to(np.sin(phase), (b, 1, h, w)),
            np.broadcast_to(np.cos(phase), (b, 1, h, w))], axis=1)
        ramp_x = np.broadcast_to(np.linspace(-1.0, 1.0, w,
                                             dtype=self.dtype)[None, None, None, :],
                                 (b, 1, h, w))
        ramp_y = np.broadcast_to(np.linspace(-1.0, 1.0, h,
                                             dtype=self.dtype)[None, None, :, None],
                                 (b, 1, h, w))
        return np.concatenate(
            [composited, planes, vis_clean, prev_anchor, next_anchor,
             weight_planes, time_planes, ramp_x, ramp_y],
            axis=1).astype(self.dtype)

    # -- forward / backward ----------------------------------------------------

    def forward(self, x, want_cache=False):
        p = self.params
        c1, k1 = nn.conv3x3_forward(x, p["w1"], p["b1"])
        h1, r1 = nn.relu_forward(c1)
        c2, k2 = nn.conv3x3_forward(h1, p["w2"], p["b2"])
        h2, r2 = nn.relu_forward(c2)                  # skip at full res
        pool1 = nn.avgpool2_forward(h2)
        c3, k3 = nn.conv3x3_forward(pool1, p["w3"], p["b3"])
        h3, r3 = nn.relu_forward(c3)
        c4, k4 = nn.conv3x3_forward(h3, p["w4"], p["b4"])
        h4, r4 = nn.relu_forward(c4)                  # skip at half res
        pool2 = nn.avgpool2_forward(h4)
        c5, k5 = nn.conv3x3_forward(pool2, p["w5"], p["b5"])
        h5, r5 = nn.relu_forward(c5)
        c6, k6 = nn.conv3x3_forward(h5, p["w6"], p["b6"])
        h6, r6 = nn.relu_forward(c6)
        cat2 = np.concatenate([h4, nn.upsample2_forward(h6)], axis=1)
        c7, k7 = nn.conv3x3_forward(cat2, p["w7"], p["b7"])
        h7, r7 = nn.relu_forward(c7)
        cat1 = np.concatenate([h2, nn.upsample2_forward(h7)], axis=1)
        c8, k8 = nn.conv3x3_forward(cat1, p["w8"], p["b8"])
        h8, r8 = nn.relu_forward(c8)
        out, k9 = nn.conv3x3_forward(h8, p["w9"], p["b9"])
        if not want_cache:
            return out
        return out, (k1, r1, k2, r2, k3, r3, k4, r4, k5, r5,
                     k6, r6, k7, r7, k8, r8, k9)

    def backward(self, cache, dout):
        p = self.params
        (k1, r1, k2, r2, k3, r3, k4, r4, k5, r5,
         k6, r6, k7, r7, k8, r8, k9) = cache
        mid = self.base + self.base // 2
        grads = {}
        dh8, grads["w9"], grads["b9"] = nn.conv3x3_backward(dout, p["w9"], k9)
        dc8 = nn.relu_backward(dh8, r8)
        dcat1, grads["w8"], grads["b8"] = nn.conv3x3_backward(dc8, p["w8"], k8)
        dh2_skip = dcat1[:, :self.base]
        dh7 = nn.upsample2_backward(dcat1[:, self.base:])
        dc7 = nn.relu_backward(dh7, r7)
        dcat2, grads["w7"], grads["b7"] = nn.conv3x3_backward(dc7, p["w7"], k7)
        dh4_skip = dcat2[:, :mid]
        dh6 = nn.upsample2_backward(dcat2[:, mid:])
        dc6 = nn.relu_backward(dh6, r6)
        dh5, grads["w6"], grads["b6"] = nn.conv3x3_backward(dc6, p["w6"], k6)
        dc5 = nn.relu_backward(dh5, r5)
        dpool2, grads["w5"], grads["b5"] = nn.conv3x3_backward(dc5, p["w5"], k5)
        dh4 = dh4_skip + nn.avgpool2_backward(dpool2)
        dc4 = nn.relu_backward(dh4, r4)
        dh3, grads["w4"], grads["b4"] = nn.conv3x3_backward(dc4, p["w4"], k4)
        dc3 = nn.relu_backward(dh3, r3)
        dpool1, grads["w3"], grads["b3"] = nn.conv3x3_backward(dc3, p["w3"], k3)
        dh2 = dh2_skip + nn.avgpool2_backward(dpool1)
        dc2 = nn.relu_backward(dh2, r2)
        dh1, grads["w2"], grads["b2"] = nn.conv3x3_backward(dc2, p["w2"], k2)
        dc1 = nn.relu_backward(dh1, r1)
        _, grads["w1"], grads["b1"] = nn.conv3x3_backward(dc1, p["w1"], k1)
        return grads

    # -- training objective -------------------------------------------------------

    def loss_and_grads(self, x0, t, noise, masks, schedule,
                       want_grads=True):
        """Masked noise-prediction MSE over the non-visible frames.

        x0: (B, L, 1, H, W) clean clips in [-1, 1]; t: (B,) steps;
        noise: same shape as x0; masks: list of VisibleMask.
        """
        b, l, c, h, w = x0.shape
        clean = x0[:, :, 0]
        eps = noise[:, :, 0]
        noisy = forward_diffuse(x0, t, schedule, noise)[:, :, 0]
        flags = np.stack([m.as_channel() for m in masks]).astype(self.dtype)
        x = self.build_input(noisy, flags, clean, t, schedule)

        hidden = (1.0 - flags)[:, :, None, None]  # loss only on masked frames
        denom = max(float(hidden.sum() * h * w), 1.0)
        if not want_grads:
            pred = self.forward(x)
            return float((hidden * (pred - eps) ** 2).sum() / denom)
        pred, cache = self.forward(x, want_cache=True)
        residual = hidden * (pred - eps)
        loss = float((residual * (pred - eps)).sum() / denom)
        grads = self.backward(cache, 2.0 * residual / denom)
        return loss, grads

    # -- persistence ------------------------------------------------------------

    def config(self) -> dict:
        return {"frames": self.frames, "size": self.size, "base": self.base,
                "dtype": self.dtype.name}

    def save(self, path) -> None:
        np.savez(path, __config__=json.dumps(self.config()), **self.params)

    @classmethod
    def load(cls, path) -> "Denoiser":
        data = np.load(path, allow_pickle=False)
        cfg = json.loads(str(data["__config__"]))
        model = cls(frames=cfg["frames"], size=cfg["size"], base=cfg["base"],
                    dtype=np.dtype(cfg["dtype"]))
        for key in model.params:
            model.params[key] = data[key].astype(model.dtype)
        return model

    def copy(self) -> "Denoiser":
        clone = Denoiser(self.frames, self.size, self.base, dtype=self.dtype)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        return clone


def train_step(model: Denoiser, batch: np.ndarray,
               schedule: DiffusionSchedule, rng: np.random.Generator,
               optimizer: nn.Adam, k_min: int = 1, k_max: int = 4) -> float:
    """One optimization step; returns the masked noise-prediction loss."""
    b, l = batch.shape[0], batch.shape[1]
    t = rng.integers(1, schedule.steps + 1, size=b)
    noise = rng.standard_normal(batch.shape).astype(model.dtype)
    masks = [sample_mask_for_training(l, k_min, k_max, rng) for _ in range(b)]
    loss, grads = model.loss_and_grads(batch.astype(model.dtype), t, noise,
                                       masks, schedule)
    optimizer.step(model.params, grads)
    return loss


def sample_mask_for_training(length, k_min, k_max, rng) -> VisibleMask:
    from .masking import sample_mask
    return sample_mask(length, k_min=k_min, k_max=min(k_max, length - 1),
                       rng=rng)
