"""Deterministic training loop: stratified split, mini-batch Adam on MSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import mse_loss
from .model import Model
from .optim import Adam


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    split: float = 0.3
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    bias_correction: bool = True
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "split": self.split,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "bias_correction": self.bias_correction,
            "seed": self.seed,
        }


def stratified_split(strata: np.ndarray, frac: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of a ``frac`` subset sampled uniformly within each stratum."""
    strata = np.asarray(strata)
    chosen = []
    for s in np.unique(strata):
        members = np.flatnonzero(strata == s)
        n_take = max(1, int(round(frac * members.size)))
        chosen.append(rng.permutation(members)[:n_take])
    return np.sort(np.concatenate(chosen))


def train(
    model: Model,
    inputs: np.ndarray,
    targets: np.ndarray,
    cfg: TrainConfig = TrainConfig(),
    strata: np.ndarray | None = None,
) -> list[float]:
    """Train in place on the configured split; returns per-epoch mean loss.

    Only the ``cfg.split`` fraction of samples (stratified when ``strata``
    is given) is ever used for updates; prediction afterwards runs on
    whatever the caller chooses.  Deterministic for a fixed seed.
    """
    inputs = np.asarray(inputs)
    targets = np.asarray(targets)
    if inputs.shape[0] == 0:
        raise ValueError("dataset is empty")
    if inputs.shape != targets.shape:
        raise ValueError("inputs and targets must have identical shapes")

    rng = np.random.default_rng(cfg.seed)
    if 0 < cfg.split < 1:
        if strata is None:
            strata = np.zeros(inputs.shape[0], dtype=int)
        train_idx = stratified_split(strata, cfg.split, rng)
    else:
        train_idx = np.arange(inputs.shape[0])

    opt = Adam(
        learning_rate=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        bias_correction=cfg.bias_correction,
    )
    dtype = model.params()[0].dtype
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(train_idx)
        total, count = 0.0, 0
        for start in range(0, order.size, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            if batch.size < 2:
                continue  # batch norm needs at least two samples
            x = inputs[batch].astype(dtype)
            y = targets[batch].astype(dtype)
            pred = model.forward(x, train=True)
            loss, grad = mse_loss(pred, y)
            model.backward(grad)
            opt.step(model.params(), model.grads())
            total += loss * batch.size
            count += batch.size
        history.append(total / max(count, 1))
    return history
