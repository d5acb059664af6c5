"""Training and evaluation driver."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .augment import AugmentParams, augment_sample
from .dataio import Dataset, batch_indices, image_stack
from .errors import ConfigError, DegenerateDataError
from .metrics import ClassMetrics, ConfusionMatrix2, confusion, macro_metrics, per_class_metrics
from .network import Network, build_fatigue_net
from .optim import Adam, bce_loss
from .rng import STREAM_AUGMENT, STREAM_SHUFFLE, Rng

THRESHOLD = 0.5  # p >= 0.5 predicts open; the tie goes to open

EVAL_BATCH = 128


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 42
    augment: bool = False
    augment_params: AugmentParams = AugmentParams()
    log: bool = False  # per-epoch progress on stdout

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int  # 1-based
    train_loss: float
    train_acc: float
    test_loss: float
    test_acc: float


@dataclass(frozen=True)
class EvalResult:
    loss: float
    cm: ConfusionMatrix2
    class0: ClassMetrics
    class1: ClassMetrics
    macro: ClassMetrics

    @property
    def accuracy(self) -> float:
        return self.class0.accuracy


def train(train_set: Dataset, test_set: Dataset, config: TrainConfig) -> tuple[Network, list[EpochRecord]]:
    """Train a fresh network. Fully deterministic for a given config: the
    seed drives init, shuffling, and every per-sample augmentation stream.

    Train loss/accuracy are running means over the epoch, measured on the
    inputs as the network saw them (augmented when augmentation is on);
    test metrics come from a clean pass after each epoch.
    """
    if len(train_set) == 0 or len(test_set) == 0:
        raise DegenerateDataError("train and test sets must both be non-empty")
    images, labels = image_stack(train_set)
    if len(set(labels.tolist())) < 2:
        raise DegenerateDataError("training set contains a single class")
    test_images, test_labels = image_stack(test_set)

    root = Rng(config.seed)
    net = build_fatigue_net(root)
    opt = Adam(net.parameters(), lr=config.lr)
    shuffle_root = root.derive(STREAM_SHUFFLE)
    augment_root = root.derive(STREAM_AUGMENT)
    n = len(train_set)
    scale = np.float32(1.0 / 255.0)

    records = []
    for epoch in range(config.epochs):
        started = time.perf_counter()
        loss_sum = 0.0
        hits = 0
        for idx in batch_indices(n, config.batch_size, shuffle_root.derive(epoch)):
            if config.augment:
                batch = np.stack([
                    augment_sample(images[i], config.augment_params,
                                   augment_root.derive(epoch * n + int(i)))
                    for i in idx
                ])
            else:
                batch = images[idx] * scale
            y = labels[idx]
            p = net.forward(batch[..., None])
            loss, grad = bce_loss(p, y)
            opt.step(net.parameters(), net.backward(grad))
            loss_sum += loss * len(idx)
            hits += int(np.sum((p >= THRESHOLD).astype(np.int64) == y))
        test_loss, test_acc = _loss_accuracy(net, test_images, test_labels)
        record = EpochRecord(epoch + 1, loss_sum / n, hits / n, test_loss, test_acc)
        records.append(record)
        if config.log:
            print(f"epoch {record.epoch}/{config.epochs}  "
                  f"train_loss={record.train_loss:.4f} train_acc={record.train_acc:.4f}  "
                  f"test_loss={record.test_loss:.4f} test_acc={record.test_acc:.4f}  "
                  f"({time.perf_counter() - started:.1f}s)")
    return net, records


def _predict_probs(net: Network, images: np.ndarray) -> np.ndarray:
    scale = np.float32(1.0 / 255.0)
    probs = [net.forward(images[i:i + EVAL_BATCH][..., None] * scale)
             for i in range(0, len(images), EVAL_BATCH)]
    return np.concatenate(probs)


def _loss_accuracy(net: Network, images: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    p = _predict_probs(net, images)
    loss, _ = bce_loss(p, labels)
    return loss, float(np.mean((p >= THRESHOLD).astype(np.int64) == labels))


def evaluate(net: Network, dataset: Dataset) -> EvalResult:
    """Clean full pass: mean loss, confusion counts, per-class and macro rows."""
    images, labels = image_stack(dataset)
    p = _predict_probs(net, images)
    loss, _ = bce_loss(p, labels)
    cm = confusion(labels, (p >= THRESHOLD).astype(np.int64))
    c0, c1 = per_class_metrics(cm)
    return EvalResult(loss, cm, c0, c1, macro_metrics(cm))
