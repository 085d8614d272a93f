"""
SGD-with-momentum training of linear heads.

Initialization and per-epoch shuffling both come from the SplitMix64 stream
seeded by ``TrainConfig.seed``: the first out*in uniform draws initialize
the weights, then every epoch draws one Fisher-Yates permutation. Training
is single-threaded and bit-reproducible for a given configuration.
"""
import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.core.errors import DataError, DimensionError
from src.core.rng import SplitMix64
from src.models.heads import LinearHead, check_labels, loss_and_grad
from src.models.hierarchy import Hierarchy

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, float, LinearHead], None]


class TrainConfig(BaseModel):
    """Hyperparameters of a training run."""

    learning_rate: float = Field(0.01, ge=0.0, description="Step size")
    momentum: float = Field(0.9, ge=0.0, lt=1.0, description="Heavy-ball momentum")
    epochs: int = Field(50, gt=0, description="Passes over the training set")
    batch_size: int = Field(16, gt=0, description="Samples per SGD step")
    seed: int = Field(0, ge=0, lt=2**64, description="Seed of initialization and shuffling")
    weight_init_scale: float = Field(0.01, ge=0.0, description="Weights ~ U(-s, s), s = scale / sqrt(in)")


Params = Dict[str, np.ndarray]


def sgd_momentum_step(
    params: Params, velocity: Params, grads: Params, cfg: TrainConfig
) -> Tuple[Params, Params]:
    """
    One heavy-ball update: v <- momentum * v + g, w <- w - lr * v.

    Returns new parameter and velocity dicts; the inputs are not modified.
    """
    new_params: Params = {}
    new_velocity: Params = {}
    for name, value in params.items():
        if value.shape != grads[name].shape or value.shape != velocity[name].shape:
            raise DimensionError(f"Shape mismatch for parameter {name!r}")
        v = cfg.momentum * velocity[name] + grads[name]
        new_velocity[name] = v
        new_params[name] = value - cfg.learning_rate * v
    return new_params, new_velocity


def init_head(in_dim: int, cfg: TrainConfig, stream: SplitMix64,
              num_classes: Optional[int] = None, hierarchy: Optional[Hierarchy] = None) -> LinearHead:
    """Uniform(-s, s) weights with s = weight_init_scale / sqrt(in_dim); zero bias."""
    head = LinearHead.zeros(in_dim, num_classes=num_classes, hierarchy=hierarchy)
    scale = cfg.weight_init_scale / math.sqrt(in_dim)
    draws = stream.uniform(head.weights.size).reshape(head.weights.shape)
    head.weights = (2.0 * draws - 1.0) * scale
    return head


def train(
    features: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig,
    num_classes: Optional[int] = None,
    hierarchy: Optional[Hierarchy] = None,
    on_epoch: Optional[EpochCallback] = None,
) -> LinearHead:
    """
    Train a flat or hierarchical linear head.

    Args:
        features: (n, in) training vectors
        labels: (n,) class ids, or (n, 2) (parent, child) rows with a hierarchy
        cfg: Hyperparameters
        num_classes: Number of classes of a flat head
        hierarchy: Label hierarchy of a hierarchical head
        on_epoch: Called after each epoch with (epoch, mean loss, head)

    Returns:
        The head after the final epoch
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError(f"Training needs a non-empty (n, in) feature matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("Training features contain non-finite values")
    if num_classes is None and hierarchy is None:
        num_classes = int(np.max(labels)) + 1

    stream = SplitMix64(cfg.seed)
    head = init_head(x.shape[1], cfg, stream, num_classes=num_classes, hierarchy=hierarchy)
    y = check_labels(head, labels)
    if y.shape[0] != x.shape[0]:
        raise DimensionError(f"{x.shape[0]} feature rows but {y.shape[0]} labels")

    params: Params = {"weights": head.weights, "bias": head.bias}
    velocity: Params = {name: np.zeros_like(value) for name, value in params.items()}
    n = x.shape[0]

    for epoch in range(1, cfg.epochs + 1):
        order = stream.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            head.weights, head.bias = params["weights"], params["bias"]
            loss, grads = loss_and_grad(head, x[batch], y[batch])
            params, velocity = sgd_momentum_step(
                params, velocity, {"weights": grads.weights, "bias": grads.bias}, cfg
            )
            total += loss * len(batch)
        head.weights, head.bias = params["weights"], params["bias"]
        epoch_loss = total / n
        logger.info(f"epoch {epoch}/{cfg.epochs} loss={epoch_loss:.6f}")
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss, head)

    return head

