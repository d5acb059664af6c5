"""Binary cross-entropy and the Adam update rule."""

from __future__ import annotations

import numpy as np

from .errors import InvalidLabelError, ShapeError

BCE_EPS = 1e-7  # probability clamp; keeps log() finite at saturated outputs


def bce_loss(predicted: np.ndarray, labels: np.ndarray):
    """Mean binary cross-entropy over a batch.

    Predictions are clamped to [BCE_EPS, 1 - BCE_EPS] before the logs.
    Returns (loss, grad) where grad is dLoss/dPrediction per sample, already
    scaled by 1/B, evaluated at the clamped probability so saturated outputs
    still receive a finite pull back toward the label.
    """
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape or predicted.ndim != 1 or predicted.size == 0:
        raise ShapeError(f"predictions {predicted.shape} and labels {labels.shape} "
                         "must be equal-length non-empty vectors")
    if not np.isin(labels, (0, 1)).all():
        raise InvalidLabelError(f"labels must be 0 or 1, got {np.unique(labels)}")
    dt = predicted.dtype if predicted.dtype.kind == "f" else np.dtype(np.float32)
    p = np.clip(predicted, dt.type(BCE_EPS), dt.type(1 - BCE_EPS))
    y = labels.astype(dt)
    per_sample = -(y * np.log(p) + (1 - y) * np.log1p(-p))
    loss = float(per_sample.mean(dtype=np.float64))
    grad = (p - y) / (p * (1 - p)) / dt.type(labels.size)
    return loss, grad


class Adam:
    """Adam with bias correction; update is theta -= lr * m_hat / (sqrt(v_hat) + eps).

    Holds one pair of moment buffers per parameter tensor and updates the
    parameters in place. Gradients must arrive in the same order every step.
    """

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-7):
        if not 0 < lr:
            raise ValueError(f"lr must be positive, got {lr}")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError(f"betas must lie in [0, 1), got ({beta1}, {beta2})")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ShapeError(f"expected {len(self.m)} tensors, got {len(params)} params / {len(grads)} grads")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ShapeError(f"gradient {g.shape} does not match parameter {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
