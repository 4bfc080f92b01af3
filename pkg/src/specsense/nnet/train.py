"""Minibatch Adam training with validation-based snapshot selection.

Each epoch shuffles the training set, averages the fused softmax loss
over minibatches, then scores the validation set in eval mode. The
returned model carries the weights from the epoch with the lowest
validation loss, not necessarily the last one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import cross_entropy, softmax, softmax_cross_entropy
from .model import Model, ModelConfig, build_model


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 1024
    epochs: int = 70
    dropout: float = 0.6
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.lr:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")


@dataclass
class AdamState:
    """First and second moment accumulators, one pair per parameter array."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adam_step(params, grads, state: AdamState, t: int, config: TrainConfig) -> None:
    """One bias-corrected Adam update, in place; t counts from 1."""
    b1, b2 = config.beta1, config.beta2
    scale = config.lr * np.sqrt(1.0 - b2**t) / (1.0 - b1**t)
    for p, g, m, v in zip(params, grads, state.m, state.v, strict=True):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= (scale * m / (np.sqrt(v) + config.eps)).astype(p.dtype, copy=False)


def evaluate_arrays(model: Model, x, y_onehot, batch_size: int = 1024):
    """Mean cross-entropy and accuracy over a feature batch, eval mode."""
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot evaluate an empty batch")
    total_loss = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        xb = x[start : start + batch_size]
        yb = y_onehot[start : start + batch_size]
        probs = softmax(model.forward(xb, train=False))
        total_loss += cross_entropy(probs, yb) * xb.shape[0]
        correct += int(np.sum(np.argmax(probs, axis=1) == np.argmax(yb, axis=1)))
    return total_loss / n, correct / n


def train(
    model_config: ModelConfig,
    train_data: tuple,
    val_data: tuple,
    config: TrainConfig,
    on_epoch=None,
) -> tuple[Model, list]:
    """Fit a fresh model; returns it plus per-epoch history rows.

    train_data and val_data are (features, onehot) pairs with features
    shaped (n, 1, 2, N). History rows are dicts with keys epoch,
    train_loss, val_loss, val_acc; on_epoch, when given, is called with
    each row as it lands. With epochs=0 the initialized model comes
    back untrained alongside an empty history.
    """
    x_train, y_train = train_data
    x_val, y_val = val_data
    if x_train.shape[0] != y_train.shape[0] or x_val.shape[0] != y_val.shape[0]:
        raise ValueError("feature and label counts disagree")
    if x_train.shape[0] == 0:
        raise ValueError("training set is empty")

    model = build_model(model_config, config.seed, config.dropout)
    if config.epochs == 0:
        return model, []

    rng = np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(0x7214,)))
    params = model.params()
    grads = model.grads()
    state = AdamState.for_params(params)
    history = []
    best = (np.inf, model.snapshot_params())
    t = 0
    n = x_train.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            logits = model.forward(x_train[idx], train=True, rng=rng)
            loss, dlogits = softmax_cross_entropy(logits, y_train[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"loss became {loss} at epoch {epoch}")
            epoch_loss += loss * idx.shape[0]
            model.backward(dlogits)
            t += 1
            adam_step(params, grads, state, t, config)
        val_loss, val_acc = evaluate_arrays(model, x_val, y_val, config.batch_size)
        row = {
            "epoch": epoch,
            "train_loss": epoch_loss / n,
            "val_loss": val_loss,
            "val_acc": val_acc,
        }
        history.append(row)
        if on_epoch is not None:
            on_epoch(row)
        if val_loss < best[0]:
            best = (val_loss, model.snapshot_params())
    model.load_params(best[1])
    return model, history
