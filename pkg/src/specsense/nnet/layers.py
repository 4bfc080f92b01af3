"""Network building blocks with hand-derived forward and backward passes.

Layers cache whatever the backward pass needs, so the calling pattern is
always forward(batch) then backward(grad) on the same batch. Convolution
is evaluated as cross-correlation over patch matrices (im2col), which
turns both passes into plain matrix products.
"""

from __future__ import annotations

import numpy as np


def glorot_uniform(rng, shape, fan_in: int, fan_out: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def _pad_split(kernel: int, mode: str) -> tuple[int, int]:
    if mode == "valid":
        return 0, 0
    if mode == "same":
        left = (kernel - 1) // 2
        return left, kernel - 1 - left
    raise ValueError(f"padding mode must be 'same' or 'valid', got {mode!r}")


class Conv2d:
    """Cross-correlation with per-axis 'same'/'valid' padding, stride 1."""

    kind = "conv"

    def __init__(self, in_channels, out_channels, kernel, pad, rng=None, dtype=np.float32):
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kh, self.kw = int(kernel[0]), int(kernel[1])
        self.pad_h, self.pad_w = pad
        _pad_split(self.kh, self.pad_h)
        _pad_split(self.kw, self.pad_w)
        fan_in = self.in_channels * self.kh * self.kw
        fan_out = self.out_channels * self.kh * self.kw
        shape = (self.out_channels, self.in_channels, self.kh, self.kw)
        if rng is None:
            self.weights = np.zeros(shape, dtype=dtype)
        else:
            self.weights = glorot_uniform(rng, shape, fan_in, fan_out, dtype)
        self.bias = np.zeros(self.out_channels, dtype=dtype)
        self.grad_w = np.zeros_like(self.weights)
        self.grad_b = np.zeros_like(self.bias)
        self._cache = None

    @property
    def params(self):
        return [self.weights, self.bias]

    @property
    def grads(self):
        return [self.grad_w, self.grad_b]

    def _geometry(self, h: int, w: int):
        ph = _pad_split(self.kh, self.pad_h)
        pw = _pad_split(self.kw, self.pad_w)
        out_h = h + ph[0] + ph[1] - self.kh + 1
        out_w = w + pw[0] + pw[1] - self.kw + 1
        if out_h < 1 or out_w < 1:
            raise ValueError(f"kernel {self.kh}x{self.kw} too large for input {h}x{w}")
        return ph, pw, out_h, out_w

    def forward(self, x, train=False, rng=None):
        b, c, h, w = x.shape
        if c != self.in_channels:
            raise ValueError(f"expected {self.in_channels} channels, got {c}")
        ph, pw, out_h, out_w = self._geometry(h, w)
        xp = np.pad(x, ((0, 0), (0, 0), ph, pw))
        patches = np.empty(
            (b, self.in_channels, self.kh, self.kw, out_h, out_w), dtype=x.dtype
        )
        for u in range(self.kh):
            for v in range(self.kw):
                patches[:, :, u, v] = xp[:, :, u : u + out_h, v : v + out_w]
        cols = patches.reshape(b, self.in_channels * self.kh * self.kw, out_h * out_w)
        flat_w = self.weights.reshape(self.out_channels, -1)
        out = np.matmul(flat_w, cols) + self.bias[:, np.newaxis]
        self._cache = (cols, x.shape, (ph, pw, out_h, out_w))
        return out.reshape(b, self.out_channels, out_h, out_w)

    def backward(self, grad):
        cols, x_shape, (ph, pw, out_h, out_w) = self._cache
        b = x_shape[0]
        g = grad.reshape(b, self.out_channels, out_h * out_w)
        self.grad_w[...] = np.tensordot(g, cols, axes=([0, 2], [0, 2])).reshape(
            self.weights.shape
        )
        self.grad_b[...] = g.sum(axis=(0, 2))
        flat_w = self.weights.reshape(self.out_channels, -1)
        dcols = np.matmul(flat_w.T, g)
        dpatches = dcols.reshape(b, self.in_channels, self.kh, self.kw, out_h, out_w)
        padded_h = x_shape[2] + ph[0] + ph[1]
        padded_w = x_shape[3] + pw[0] + pw[1]
        dxp = np.zeros((b, self.in_channels, padded_h, padded_w), dtype=grad.dtype)
        for u in range(self.kh):
            for v in range(self.kw):
                dxp[:, :, u : u + out_h, v : v + out_w] += dpatches[:, :, u, v]
        return dxp[
            :, :, ph[0] : padded_h - ph[1] or None, pw[0] : padded_w - pw[1] or None
        ]


class Dense:
    """Affine map y = x W^T + b on flattened features."""

    kind = "dense"

    def __init__(self, in_features, out_features, rng=None, dtype=np.float32):
        self.in_features = int(in_features)
        self.out_features = int(out_features)
        shape = (self.out_features, self.in_features)
        if rng is None:
            self.weights = np.zeros(shape, dtype=dtype)
        else:
            self.weights = glorot_uniform(rng, shape, self.in_features, self.out_features, dtype)
        self.bias = np.zeros(self.out_features, dtype=dtype)
        self.grad_w = np.zeros_like(self.weights)
        self.grad_b = np.zeros_like(self.bias)
        self._x = None

    @property
    def params(self):
        return [self.weights, self.bias]

    @property
    def grads(self):
        return [self.grad_w, self.grad_b]

    def forward(self, x, train=False, rng=None):
        if x.shape[1] != self.in_features:
            raise ValueError(f"expected {self.in_features} features, got {x.shape[1]}")
        self._x = x
        return x @ self.weights.T + self.bias

    def backward(self, grad):
        self.grad_w[...] = grad.T @ self._x
        self.grad_b[...] = grad.sum(axis=0)
        return grad @ self.weights


class ReLU:
    kind = "relu"
    params = []
    grads = []

    def __init__(self):
        self._mask = None

    def forward(self, x, train=False, rng=None):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        return grad * self._mask


class Dropout:
    """Inverted dropout: units drop with probability rate during training."""

    kind = "dropout"
    params = []
    grads = []

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs an RNG")
        keep = rng.random(x.shape) >= self.rate
        self._mask = keep.astype(x.dtype) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask


class Flatten:
    kind = "flatten"
    params = []
    grads = []

    def __init__(self):
        self._shape = None

    def forward(self, x, train=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


def softmax(z) -> np.ndarray:
    """Row-wise softmax with max subtraction for overflow safety."""
    z = np.asarray(z)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(yhat, y) -> float:
    """Mean categorical cross-entropy; probabilities clipped at 1e-12."""
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    per_row = -np.sum(y * np.log(np.maximum(yhat, 1e-12)), axis=-1)
    return float(np.mean(per_row))


def softmax_cross_entropy(logits, y_onehot):
    """Fused loss for training: returns (loss, dloss/dlogits).

    The gradient is (softmax - target) / batch, the exact derivative of
    the mean cross-entropy through the softmax.
    """
    probs = softmax(logits)
    loss = cross_entropy(probs, y_onehot)
    grad = (probs - y_onehot.astype(probs.dtype)) / probs.shape[0]
    return loss, grad
