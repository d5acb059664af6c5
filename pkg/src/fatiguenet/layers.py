"""Network building blocks with hand-written backward passes.

All layers operate on batches: images are (B, H, W, C) arrays, flat features
are (B, N).  Forward caches whatever backward needs; backward consumes the
cache, stores parameter gradients on the layer, and returns the gradient
with respect to its input.  Arithmetic stays in the dtype of the parameters
(float32 in production; the gradient-check tests run the same code at
float64).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError, StateError
from .rng import Rng

RELU = "relu"
SIGMOID = "sigmoid"


def glorot_uniform_init(rng: Rng, shape, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform init on [-L, L], L = sqrt(6 / (fan_in + fan_out)), float32."""
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise ShapeError(f"cannot initialise tensor with shape {shape}")
    if fan_in < 1 or fan_out < 1:
        raise ShapeError(f"fans must be positive, got ({fan_in}, {fan_out})")
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-limit, limit, shape).astype(np.float32)


class Conv2D:
    """Valid 3x3 convolution, stride 1, no padding.

    kernels: (3, 3, c_in, c_out), bias: (c_out,).  Output spatial size is
    (H-2, W-2).  Implemented as im2col + matmul; the unfolded patches are
    kept between forward and backward.
    """

    def __init__(self, kernels: np.ndarray, bias: np.ndarray):
        kernels = np.asarray(kernels)
        bias = np.asarray(bias)
        if kernels.ndim != 4 or kernels.shape[:2] != (3, 3):
            raise ShapeError(f"conv kernels must be (3, 3, c_in, c_out), got {kernels.shape}")
        if bias.shape != (kernels.shape[3],):
            raise ShapeError(f"conv bias {bias.shape} does not match {kernels.shape[3]} filters")
        self.kernels = kernels
        self.bias = bias
        self.grad_kernels = None
        self.grad_bias = None
        self._cache = None

    def params(self):
        return [self.kernels, self.bias]

    def grads(self):
        return [self.grad_kernels, self.grad_bias]

    def output_shape(self, input_shape):
        h, w, c = input_shape
        if c != self.kernels.shape[2]:
            raise ShapeError(f"conv expects {self.kernels.shape[2]} channels, got {c}")
        if h < 3 or w < 3:
            raise ShapeError(f"input {h}x{w} too small for a 3x3 window")
        return (h - 2, w - 2, self.kernels.shape[3])

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError(f"conv input must be (B, H, W, C), got {x.shape}")
        b = x.shape[0]
        oh, ow, f = self.output_shape(x.shape[1:])
        c = self.kernels.shape[2]
        # (B, OH, OW, C, 3, 3) -> (B, OH*OW, 9C) with patch order (u, v, c),
        # matching kernels.reshape(9C, F)
        win = sliding_window_view(x, (3, 3), axis=(1, 2))
        cols = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3))
        cols = cols.reshape(b, oh * ow, 9 * c)
        wmat = self.kernels.reshape(9 * c, f)
        out = cols @ wmat + self.bias
        self._cache = (x.shape, cols)
        return out.reshape(b, oh, ow, f)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StateError("conv backward called before forward")
        x_shape, cols = self._cache
        self._cache = None
        b, h, w, c = x_shape
        oh, ow, f = h - 2, w - 2, self.kernels.shape[3]
        if upstream.shape != (b, oh, ow, f):
            raise ShapeError(f"conv upstream {upstream.shape} does not match output {(b, oh, ow, f)}")
        g = upstream.reshape(b, oh * ow, f)
        self.grad_bias = g.sum(axis=(0, 1))
        self.grad_kernels = np.tensordot(cols, g, axes=([0, 1], [0, 1])).reshape(self.kernels.shape)
        wmat = self.kernels.reshape(9 * c, f)
        dcols = (g @ wmat.T).reshape(b, oh, ow, 3, 3, c)
        dx = np.zeros(x_shape, dtype=upstream.dtype)
        for u in range(3):
            for v in range(3):
                dx[:, u:u + oh, v:v + ow, :] += dcols[:, :, :, u, v, :]
        return dx


class AvgPool2D:
    """2x2 average pooling, stride 2. An odd trailing row/column is dropped."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def grads(self):
        return []

    def output_shape(self, input_shape):
        h, w, c = input_shape
        if h < 2 or w < 2:
            raise ShapeError(f"input {h}x{w} too small for a 2x2 pool")
        return (h // 2, w // 2, c)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError(f"pool input must be (B, H, W, C), got {x.shape}")
        b, h, w, c = x.shape
        oh, ow, _ = self.output_shape(x.shape[1:])
        blocks = x[:, :2 * oh, :2 * ow, :].reshape(b, oh, 2, ow, 2, c)
        self._cache = x.shape
        return blocks.mean(axis=(2, 4))

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StateError("pool backward called before forward")
        x_shape = self._cache
        self._cache = None
        b, h, w, c = x_shape
        oh, ow = h // 2, w // 2
        if upstream.shape != (b, oh, ow, c):
            raise ShapeError(f"pool upstream {upstream.shape} does not match output {(b, oh, ow, c)}")
        dx = np.zeros(x_shape, dtype=upstream.dtype)
        spread = upstream * upstream.dtype.type(0.25)
        # dropped trailing row/column (odd extents) received no signal
        dx[:, :2 * oh, :2 * ow, :] = np.repeat(np.repeat(spread, 2, axis=1), 2, axis=2)
        return dx


class Flatten:
    """(B, H, W, C) -> (B, H*W*C), row-major."""

    def __init__(self):
        self._cache = None

    def params(self):
        return []

    def grads(self):
        return []

    def output_shape(self, input_shape):
        h, w, c = input_shape
        return (h * w * c,)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError(f"flatten input must be (B, H, W, C), got {x.shape}")
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StateError("flatten backward called before forward")
        x_shape = self._cache
        self._cache = None
        return upstream.reshape(x_shape)


class Dense:
    """Fully connected layer: out = x @ weights.T + bias.

    weights: (n_out, n_in), bias: (n_out,).
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        weights = np.asarray(weights)
        bias = np.asarray(bias)
        if weights.ndim != 2:
            raise ShapeError(f"dense weights must be (n_out, n_in), got {weights.shape}")
        if bias.shape != (weights.shape[0],):
            raise ShapeError(f"dense bias {bias.shape} does not match {weights.shape[0]} units")
        self.weights = weights
        self.bias = bias
        self.grad_weights = None
        self.grad_bias = None
        self._cache = None

    def params(self):
        return [self.weights, self.bias]

    def grads(self):
        return [self.grad_weights, self.grad_bias]

    def output_shape(self, input_shape):
        if len(input_shape) != 1 or input_shape[0] != self.weights.shape[1]:
            raise ShapeError(f"dense expects ({self.weights.shape[1]},), got {input_shape}")
        return (self.weights.shape[0],)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.weights.shape[1]:
            raise ShapeError(f"dense input {x.shape} does not match weights {self.weights.shape}")
        self._cache = x
        return x @ self.weights.T + self.bias

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StateError("dense backward called before forward")
        x = self._cache
        self._cache = None
        if upstream.shape != (x.shape[0], self.weights.shape[0]):
            raise ShapeError(f"dense upstream {upstream.shape} does not match output")
        self.grad_weights = upstream.T @ x
        self.grad_bias = upstream.sum(axis=0)
        return upstream @ self.weights


class Activation:
    """Elementwise nonlinearity, kind 'relu' or 'sigmoid'."""

    def __init__(self, kind: str):
        if kind not in (RELU, SIGMOID):
            raise ValueError(f"unknown activation kind {kind!r}")
        self.kind = kind
        self._cache = None

    def params(self):
        return []

    def grads(self):
        return []

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if self.kind == RELU:
            out = np.maximum(x, x.dtype.type(0))
            self._cache = x
        else:
            out = sigmoid(x)
            self._cache = out  # sigma'(x) = s * (1 - s)
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise StateError("activation backward called before forward")
        cached = self._cache
        self._cache = None
        if upstream.shape != cached.shape:
            raise ShapeError(f"activation upstream {upstream.shape} does not match {cached.shape}")
        if self.kind == RELU:
            return upstream * (cached > 0)
        one = cached.dtype.type(1)
        return upstream * cached * (one - cached)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, x.dtype.type(0))


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1 / (1 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])  # avoids overflow for large negatives
    out[~pos] = ex / (1 + ex)
    return out
