"""Training loop: adaptive-gradient updates with cosine-decayed rate.

``train_step`` performs one update and returns the composite loss;
``run_training`` drives a fixed number of steps over a dataset and
writes a JSON log of per-step losses and learning rates.
"""

import json
import os
from dataclasses import asdict, dataclass

import torch

from .errors import NonFiniteLoss
from .losses import LossWeights, loss_composite
from .model import CtfEstimator

LOG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Step budget, batch size, optimizer settings, and sampling seed."""

    steps: int = 200
    batch_size: int = 4
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be positive")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive,"
                             " weight_decay nonnegative")


class Trainer:
    """Bundles a network with its optimizer and learning-rate schedule."""

    def __init__(self, net: CtfEstimator, config: TrainConfig = TrainConfig(),
                 weights: LossWeights = LossWeights()):
        self.net = net
        self.config = config
        self.weights = weights
        self.optimizer = torch.optim.AdamW(
            net.parameters(), lr=config.learning_rate,
            weight_decay=config.weight_decay)
        self.scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
            self.optimizer, T_max=config.steps)

    def step(self, batch) -> float:
        return train_step(self, batch)


def train_step(trainer: Trainer, batch) -> float:
    """One gradient update on a (Y features, S, X) batch; returns the
    composite loss.  A NaN or Inf loss raises NonFiniteLoss before any
    parameter is touched."""
    y, s, x = batch
    trainer.net.train()
    h_hat, x_hat, s_hat = trainer.net(y)
    loss = loss_composite(h_hat, s, x, x_hat, s_hat, trainer.weights)
    if not torch.isfinite(loss):
        raise NonFiniteLoss(f"composite loss is {loss.item()!r}")
    trainer.optimizer.zero_grad()
    loss.backward()
    trainer.optimizer.step()
    trainer.scheduler.step()
    return float(loss.detach())


def run_training(net: CtfEstimator, dataset,
                 config: TrainConfig = TrainConfig(),
                 weights: LossWeights = LossWeights(),
                 log_path: str | None = None) -> list[float]:
    """Train for ``config.steps`` random batches; returns per-step losses.

    When ``log_path`` is given, a JSON log is written with the run
    configuration, per-step losses, and learning rates.
    """
    torch.manual_seed(config.seed)
    trainer = Trainer(net, config, weights)
    losses: list[float] = []
    rates: list[float] = []
    for batch in dataset.random_batches(config.batch_size, config.steps,
                                        config.seed):
        rates.append(trainer.scheduler.get_last_lr()[0])
        losses.append(train_step(trainer, batch))
    if log_path is not None:
        log = {"schema_version": LOG_SCHEMA_VERSION, "kind": "training-log",
               "config": asdict(config), "net_config": asdict(net.config),
               "loss_weights": asdict(weights),
               "num_items": len(dataset), "losses": losses,
               "learning_rates": rates,
               "first_loss": losses[0], "final_loss": losses[-1]}
        tmp = log_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(log, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, log_path)
    return losses
