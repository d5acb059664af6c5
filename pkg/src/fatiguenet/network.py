"""Layer stack and the fatigue-detection architecture."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, StateError
from .layers import (
    RELU,
    SIGMOID,
    Activation,
    AvgPool2D,
    Conv2D,
    Dense,
    Flatten,
    glorot_uniform_init,
)
from .rng import STREAM_INIT, Rng

INPUT_SHAPE = (100, 100, 1)


class Network:
    """Sequential stack ending in a single sigmoid unit.

    forward takes a (B, H, W, C) batch and returns (B,) probabilities;
    backward takes the (B,) loss gradient and returns one gradient per
    parameter tensor, in parameters() order.
    """

    def __init__(self, layers, input_shape):
        self.layers = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self._forwarded = False

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def output_shapes(self) -> list[tuple[int, ...]]:
        """Per-layer output shapes from propagating input_shape; validates fit."""
        shapes = []
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        return shapes

    def forward(self, batch: np.ndarray) -> np.ndarray:
        if batch.ndim != 4 or batch.shape[1:] != self.input_shape:
            raise ShapeError(
                f"network expects (B, {', '.join(map(str, self.input_shape))}), got {batch.shape}"
            )
        out = batch
        for layer in self.layers:
            out = layer.forward(out)
        if out.ndim != 2 or out.shape[1] != 1:
            raise ShapeError(f"network head must emit one unit per sample, got {out.shape}")
        self._forwarded = True
        return out.reshape(-1)

    def backward(self, loss_grad: np.ndarray) -> list[np.ndarray]:
        if not self._forwarded:
            raise StateError("network backward called before forward")
        self._forwarded = False
        g = np.asarray(loss_grad).reshape(-1, 1)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return [gr for layer in self.layers for gr in layer.grads()]


def build_fatigue_net(rng: Rng) -> Network:
    """Eye-state classifier: 100x100 grayscale in, P(open) out.

    Two conv/relu/pool stages (6 then 16 filters) feed dense layers of 120,
    84, and 1 unit. Glorot-uniform weights, zero biases. Layer init streams
    are derived from rng, so equal seeds build bit-identical networks.
    """
    init = rng.derive(STREAM_INIT)

    def conv(idx, c_in, c_out):
        k = glorot_uniform_init(init.derive(idx), (3, 3, c_in, c_out), 9 * c_in, 9 * c_out)
        return Conv2D(k, np.zeros(c_out, dtype=np.float32))

    def dense(idx, n_in, n_out):
        w = glorot_uniform_init(init.derive(idx), (n_out, n_in), n_in, n_out)
        return Dense(w, np.zeros(n_out, dtype=np.float32))

    layers = [
        conv(0, 1, 6),
        Activation(RELU),
        AvgPool2D(),
        conv(1, 6, 16),
        Activation(RELU),
        AvgPool2D(),
        Flatten(),
        dense(2, 23 * 23 * 16, 120),
        Activation(RELU),
        dense(3, 120, 84),
        Activation(RELU),
        dense(4, 84, 1),
        Activation(SIGMOID),
    ]
    net = Network(layers, INPUT_SHAPE)
    net.output_shapes()  # fail fast if the stack is inconsistent
    return net
