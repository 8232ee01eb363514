"""Network building blocks with explicit forward/backward passes.

All computation is float64 so the analytic gradients can be checked
against central finite differences at tight tolerances.  Convolutions are
cross-correlations (no kernel flip) evaluated through an im2col
rearrangement and a single matmul per layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def _im2col(x_padded: np.ndarray, k: int) -> np.ndarray:
    """(B, C, Hp, Wp) -> (B, H*W, C*k*k) patch matrix for stride-1 windows."""
    windows = sliding_window_view(x_padded, (k, k), axis=(2, 3))  # (B, C, H, W, k, k)
    b, c, h, w = windows.shape[:4]
    return windows.transpose(0, 2, 3, 1, 4, 5).reshape(b, h * w, c * k * k)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, pad: int = 1):
    """Stride-1 cross-correlation with zero padding.

    x: (B, C, H, W); w: (O, C, k, k); b: (O,).  Returns (y, cache) with
    y: (B, O, H', W') where H' = H + 2*pad - k + 1.
    """
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ValueError(f"conv shape mismatch: x {x.shape}, w {w.shape}")
    k = w.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = _im2col(xp, k)  # (B, P, C*k*k)
    y = cols @ w.reshape(w.shape[0], -1).T + b  # (B, P, O)
    h_out = x.shape[2] + 2 * pad - k + 1
    w_out = x.shape[3] + 2 * pad - k + 1
    y = y.transpose(0, 2, 1).reshape(x.shape[0], w.shape[0], h_out, w_out)
    cache = (cols, x.shape, w.shape, pad)
    return y, cache


def conv2d_backward(dy: np.ndarray, cache, w: np.ndarray):
    """Gradients of the stride-1 cross-correlation: (dx, dw, db)."""
    cols, x_shape, w_shape, pad = cache
    batch, channels, height, width = x_shape
    out_ch, _, k, _ = w_shape
    dyf = dy.reshape(batch, out_ch, -1).transpose(0, 2, 1)  # (B, P, O)
    dw = np.einsum("bpo,bpk->ok", dyf, cols).reshape(w_shape)
    db = dy.sum(axis=(0, 2, 3))
    dcols = dyf @ w.reshape(out_ch, -1)  # (B, P, C*k*k)
    h_out = height + 2 * pad - k + 1
    w_out = width + 2 * pad - k + 1
    dcols = dcols.reshape(batch, h_out, w_out, channels, k, k)
    dxp = np.zeros((batch, channels, height + 2 * pad, width + 2 * pad))
    for ki in range(k):
        for kj in range(k):
            dxp[:, :, ki:ki + h_out, kj:kj + w_out] += dcols[:, :, :, :, ki, kj].transpose(0, 3, 1, 2)
    dx = dxp[:, :, pad:pad + height, pad:pad + width] if pad else dxp
    return dx, dw, db


@dataclass
class BatchNormState:
    """Running statistics carried across training into inference."""

    running_mean: np.ndarray
    running_var: np.ndarray

    @classmethod
    def initial(cls, channels: int) -> "BatchNormState":
        return cls(np.zeros(channels), np.ones(channels))


def batchnorm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray,
                      state: BatchNormState, training: bool):
    """Per-channel batch normalization over (B, H, W).

    Training mode normalizes by batch statistics (eps 1e-5) and updates
    the running stats with momentum 0.1 (sample-corrected variance);
    eval mode normalizes by the running stats.  Training on a single
    sample is rejected: its batch variance is meaningless.
    """
    if training and x.shape[0] < 2:
        raise ValueError("batchnorm training requires a batch of at least 2")
    axes = (0, 2, 3)
    if training:
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        n = x.shape[0] * x.shape[2] * x.shape[3]
        state.running_mean = (1 - BN_MOMENTUM) * state.running_mean + BN_MOMENTUM * mean
        state.running_var = (1 - BN_MOMENTUM) * state.running_var + BN_MOMENTUM * var * n / (n - 1)
    else:
        mean = state.running_mean
        var = state.running_var
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean[:, None, None]) * inv_std[:, None, None]
    y = gamma[:, None, None] * xhat + beta[:, None, None]
    cache = (xhat, inv_std, gamma, training)
    return y, cache


def batchnorm_backward(dy: np.ndarray, cache):
    """Gradients (dx, dgamma, dbeta); dx flows through batch stats in train mode."""
    xhat, inv_std, gamma, training = cache
    axes = (0, 2, 3)
    dgamma = (dy * xhat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dxhat = dy * gamma[:, None, None]
    if not training:
        return dxhat * inv_std[:, None, None], dgamma, dbeta
    n = dy.shape[0] * dy.shape[2] * dy.shape[3]
    sum_dxhat = dxhat.sum(axis=axes)
    sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes)
    dx = (inv_std[:, None, None] / n) * (
        n * dxhat - sum_dxhat[:, None, None] - xhat * sum_dxhat_xhat[:, None, None]
    )
    return dx, dgamma, dbeta


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Affine map y = x @ w.T + b for x: (B, I), w: (O, I), b: (O,)."""
    if x.shape[1] != w.shape[1]:
        raise ValueError(f"linear shape mismatch: x {x.shape}, w {w.shape}")
    return x @ w.T + b, x


def linear_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray):
    return dy @ w, dy.T @ x, dy.sum(axis=0)


def relu_forward(x: np.ndarray):
    mask = x > 0
    return x * mask, mask


def relu_backward(dy: np.ndarray, mask: np.ndarray):
    return dy * mask


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax via the max-shift for overflow safety."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean negative log-likelihood of the true classes, with its gradient.

    logits: (B, K); labels: (B,) ints.  Uses max-shifted log-sum-exp, so
    arbitrarily large logits neither overflow nor lose the loss.  The
    gradient is (softmax - onehot) / B.
    """
    labels = np.asarray(labels)
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    batch = np.arange(logits.shape[0])
    losses = log_norm - z[batch, labels]
    probs = softmax(logits)
    grad = probs.copy()
    grad[batch, labels] -= 1.0
    return losses.mean(), grad / logits.shape[0]


@dataclass
class SgdMomentum:
    """Classic momentum SGD: v <- mu*v + g; p <- p - lr*v."""

    lr: float
    momentum: float = 0.9
    velocity: dict = field(default_factory=dict)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        for name, p in params.items():
            v = self.velocity.get(name)
            if v is None:
                v = np.zeros_like(p)
            v = self.momentum * v + grads[name]
            self.velocity[name] = v
            p -= self.lr * v


@dataclass
class PlateauScheduler:
    """Learning-rate halt-and-descend rule keyed on validation loss.

    A loss is "no better" when it fails to undercut the best seen by more
    than the threshold.  After `patience` consecutive no-better epochs the
    rate is multiplied by `factor` (floored at `min_lr`) and the streak
    resets; the best-seen loss updates whenever a real improvement lands.
    """

    lr: float
    factor: float = 0.1
    patience: int = 5
    min_lr: float = 1e-5
    threshold: float = 1e-4
    best: float = float("inf")
    bad_epochs: int = 0

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise ValueError("factor must lie in (0, 1)")

    def step(self, val_loss: float) -> float:
        """Feed one epoch's validation loss; returns the rate to use next."""
        if val_loss < self.best - self.threshold:
            self.best = val_loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
            if self.bad_epochs >= self.patience:
                self.lr = max(self.lr * self.factor, self.min_lr)
                self.bad_epochs = 0
        return self.lr
