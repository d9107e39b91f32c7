"""Minimal numpy building blocks with hand-written backward passes.

Everything is plain arrays and explicit gradients; the finite-difference
test in the suite keeps the analytic gradients honest.
"""

import numpy as np

_OFFSETS = [(di, dj) for di in range(3) for dj in range(3)]


def im2col3(x: np.ndarray):
    """(B, C, H, W) -> (B, C*9, H*W) columns for a same-padded 3x3 conv."""
    b, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((b, c, 9, h * w), dtype=x.dtype)
    for k, (di, dj) in enumerate(_OFFSETS):
        cols[:, :, k, :] = xp[:, :, di:di + h, dj:dj + w].reshape(b, c, h * w)
    return cols.reshape(b, c * 9, h * w)


def col2im3(dcols: np.ndarray, shape):
    """Adjoint of im2col3: scatter column gradients back onto the image."""
    b, c, h, w = shape
    dcols = dcols.reshape(b, c, 9, h * w)
    dxp = np.zeros((b, c, h + 2, w + 2), dtype=dcols.dtype)
    for k, (di, dj) in enumerate(_OFFSETS):
        dxp[:, :, di:di + h, dj:dj + w] += dcols[:, :, k].reshape(b, c, h, w)
    return dxp[:, :, 1:h + 1, 1:w + 1]


def conv3x3_forward(x, weight, bias):
    b, c, h, w = x.shape
    out_ch = weight.shape[0]
    cols = im2col3(x)
    wm = weight.reshape(out_ch, c * 9)
    y = np.matmul(wm, cols) + bias[:, None]
    return y.reshape(b, out_ch, h, w), (cols, x.shape)


def conv3x3_backward(dy, weight, ctx):
    cols, x_shape = ctx
    b, c, h, w = x_shape
    out_ch = weight.shape[0]
    dyf = dy.reshape(b, out_ch, h * w)
    dbias = dyf.sum(axis=(0, 2))
    dwm = np.matmul(dyf, cols.transpose(0, 2, 1)).sum(axis=0)
    dcols = np.matmul(weight.reshape(out_ch, c * 9).T, dyf)
    dx = col2im3(dcols, x_shape)
    return dx, dwm.reshape(weight.shape), dbias


def relu_forward(x):
    return np.maximum(x, 0.0), x > 0


def relu_backward(dy, mask):
    return dy * mask


def avgpool2_forward(x):
    b, c, h, w = x.shape
    return x.reshape(b, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))


def avgpool2_backward(dy):
    return dy.repeat(2, axis=2).repeat(2, axis=3) / 4.0


def upsample2_forward(x):
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2_backward(dy):
    b, c, h, w = dy.shape
    return dy.reshape(b, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def he_init(rng, out_ch, in_ch, dtype):
    scale = np.sqrt(2.0 / (in_ch * 9))
    return (rng.standard_normal((out_ch, in_ch, 3, 3)) * scale).astype(dtype)


class Adam:
    def __init__(self, params: dict, lr=2e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.step_count += 1
        t = self.step_count
        for key, g in grads.items():
            m = self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * g
            v = self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * g * g
            m_hat = m / (1 - self.beta1 ** t)
            v_hat = v / (1 - self.beta2 ** t)
            params[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
