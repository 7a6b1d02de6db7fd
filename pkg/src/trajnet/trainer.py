"""
Stage-1 training loop.

An epoch is ``steps_per_epoch`` minibatches. Trajectories are visited in a
per-epoch permutation; each sample's (t, goal, mask) draw comes from a stream
split off the run seed by (epoch, step, position), so reruns are bit-exact.
Validation uses a fixed sample set drawn once from ``validation_seed``.
"""

import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from ..data import Dataset, EmptyDataset, WindowBatch, WindowSampler, compute_norm_stats
from ..numeric import Adam, NonFiniteValue, RngStream, Tape, backward
from ..utils.log import get_logger
from ..utils.run_dir import RunDir
from .checkpoint import save_trajnet
from .config import TrajNetConfig
from .model import TrajNet, batch_loss, init_params

log = get_logger("trajnet")


@dataclass
class TrainResult:
    best_epoch: int
    best_loss: float
    validation_losses: List[float] = field(default_factory=list)
    checkpoints: List[str] = field(default_factory=list)
    model: Optional[TrajNet] = None


def epoch_indices(n: int, batch_size: int, steps: int, rng: RngStream) -> np.ndarray:
    """``[steps, batch_size]`` trajectory indices walking a permutation, wrapping as needed."""
    order = rng.permutation(n)
    flat = np.arange(steps * batch_size) % n
    return order[flat].reshape(steps, batch_size)


def validation_batch(sampler: WindowSampler, config: TrajNetConfig) -> WindowBatch:
    rng = RngStream(config.validation_seed)
    indices = np.arange(config.validation_samples) % len(sampler)
    return sampler.batch(indices, rng)


def evaluate_loss(model: TrajNet, batch: WindowBatch) -> float:
    """Eval-mode loss; nothing is recorded for backpropagation."""
    return batch_loss(model, batch, training=False).item()


def train_trajnet(config: TrajNetConfig, dataset: Dataset, seed: int, run: RunDir,
                  epochs: Optional[int] = None) -> TrainResult:
    """
    Train a TrajNet and checkpoint it every epoch.

    Args:
        config: Resolved TrajNet config
        dataset: Loaded dataset; normalization uses its training split only
        seed: Run seed
        run: Output run directory
        epochs: Overrides ``config.epochs``

    Raises:
        EmptyDataset: Either split has no usable trajectory
        NonFiniteValue: The loss diverged
    """
    epochs = epochs or config.epochs
    meta = dataset.meta
    if not len(dataset.train_indices) or not len(dataset.validation_indices):
        raise EmptyDataset(dataset.path)
    stats = compute_norm_stats(dataset.train, meta)
    train = WindowSampler(dataset.train, meta, stats, config.k, config.p, config.objective, config.mask_ratio)
    valid = WindowSampler(dataset.validation, meta, stats, config.k, config.p, config.objective, config.mask_ratio)
    if not len(train) or not len(valid):
        raise EmptyDataset(dataset.path)

    root = RngStream(seed)
    model = init_params(config, meta, root.split("init"))
    optimizer = Adam(model.tensors, config.learning_rate)
    val_batch = validation_batch(valid, config)
    log.info("trajnet: %d parameters, objective %s, (k, p) = (%d, %d), %d train / %d validation trajectories",
             model.params.count(), config.objective.value, config.k, config.p, len(train), len(valid))

    result = TrainResult(best_epoch=0, best_loss=float("inf"), model=model)
    tape = Tape()
    for epoch in tqdm(range(1, epochs + 1), desc="trajnet", file=sys.stderr, disable=None):
        plan = epoch_indices(len(train), config.batch_size, config.steps_per_epoch, root.split(f"epoch/{epoch}"))
        for step, indices in enumerate(plan, start=1):
            step_rng = root.split(f"step/{epoch}/{step}")
            batch = train.batch(indices, step_rng.split("samples"))
            optimizer.zero_grad()
            tape.clear()
            try:
                with tape.recording():
                    loss = batch_loss(model, batch, step_rng.split("dropout"), training=True)
                backward(loss, tape)
            except NonFiniteValue:
                log.error("trajnet: non-finite value at epoch %d step %d", epoch, step)
                raise
            optimizer.step()
            run.metrics.append("trajnet-train", seed=seed, epoch=epoch, step=step, loss=loss.item())

        val_loss = evaluate_loss(model, val_batch)
        run.metrics.append("trajnet-val", seed=seed, epoch=epoch, loss=val_loss)
        path = save_trajnet(run.checkpoint_path("trajnet", epoch), model, stats, meta, optimizer,
                            seed=seed, epoch=epoch, validation_loss=val_loss)
        result.validation_losses.append(val_loss)
        result.checkpoints.append(str(path))
        if val_loss < result.best_loss:
            result.best_epoch, result.best_loss = epoch, val_loss
            run.mark_best(path, epoch, val_loss)
        log.info("trajnet epoch %d: validation loss %.6f", epoch, val_loss)
    tape.clear()
    return result
