"""
Stage-2 training loop: regress ``a_t`` from ``(s_t, g, conditioning)`` with
the TrajNet frozen.
"""

import sys
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from ..data import Dataset, EmptyDataset, Objective, WindowSampler, compute_norm_stats
from ..numeric import Adam, NonFiniteValue, RngStream, Tape, backward, mse_loss
from ..trajnet import TrajNetBundle, check_compatible, epoch_indices
from ..utils.error import PipelineError, UsageError
from ..utils.log import get_logger
from ..utils.run_dir import RunDir
from .checkpoint import save_policy
from .config import Conditioning, PolicyConfig
from .policynet import Policy, conditioning_features, conditioning_width, policy_forward

log = get_logger("policy")


@dataclass
class PolicyTrainResult:
    epoch_losses: List[float] = field(default_factory=list)
    checkpoints: List[str] = field(default_factory=list)
    initial_loss: float = float("nan")
    policy: Optional[Policy] = None


def train_policy(config: PolicyConfig, dataset: Dataset, seed: int, run: RunDir,
                 trajnet: Optional[TrajNetBundle] = None, epochs: Optional[int] = None) -> PolicyTrainResult:
    """
    Train a policy and keep the newest ``retain_checkpoints`` epoch checkpoints.

    Raises:
        UsageError: A TrajNet is required by the conditioning mode but missing
        IncompatibleError: The TrajNet does not match the dataset's dimensions
    """
    epochs = epochs or config.epochs
    meta = dataset.meta
    mode = config.conditioning
    if mode is Conditioning.NONE:
        trajnet = None
        stats = compute_norm_stats(dataset.train, meta)
        history, model = 1, None
    else:
        if trajnet is None:
            raise UsageError(f"conditioning '{mode.value}' needs --trajnet")
        check_compatible(trajnet, meta)
        stats, history, model = trajnet.stats, trajnet.config.k, trajnet.model
        model.params.freeze()
    encoder_checksum = model.params.checksum() if model is not None else None

    sampler = WindowSampler(dataset.train, meta, stats, history, 0, Objective.AE_H)
    if not len(sampler):
        raise EmptyDataset(dataset.path)
    root = RngStream(seed)
    cond_width = conditioning_width(mode, model.config if model is not None else None)
    policy = Policy(config, meta.state_dim, meta.action_dim, meta.goal_width, cond_width, root.split("init"))
    optimizer = Adam(policy.tensors, config.learning_rate)
    log.info("policy: conditioning %s, input width %d, %d parameters",
             mode.value, policy.input_width, policy.params.count())

    result = PolicyTrainResult(policy=policy)
    tape = Tape()
    for epoch in tqdm(range(1, epochs + 1), desc="policy", file=sys.stderr, disable=None):
        plan = epoch_indices(len(sampler), config.batch_size, config.steps_per_epoch, root.split(f"epoch/{epoch}"))
        losses = []
        for step, indices in enumerate(plan, start=1):
            step_rng = root.split(f"step/{epoch}/{step}")
            batch = sampler.batch(indices, step_rng.split("samples"))
            cond = conditioning_features(mode, model, batch.states, batch.goals, batch.actions)
            optimizer.zero_grad()
            tape.clear()
            try:
                with tape.recording():
                    pred = policy_forward(policy, batch.current_states, batch.goals, cond,
                                          step_rng.split("dropout"), training=True)
                    loss = mse_loss(pred, batch.current_actions)
                backward(loss, tape)
            except NonFiniteValue:
                log.error("policy: non-finite value at epoch %d step %d", epoch, step)
                raise
            optimizer.step()
            losses.append(loss.item())
            run.metrics.append("policy-train", seed=seed, epoch=epoch, step=step, loss=loss.item())
        if epoch == 1:
            result.initial_loss = losses[0]

        epoch_loss = float(np.mean(losses))
        run.metrics.append("policy-epoch", seed=seed, epoch=epoch, loss=epoch_loss)
        save_policy(run.checkpoint_path("policy", epoch), policy, stats, meta, history,
                    trajnet.path if trajnet is not None else None, optimizer,
                    seed=seed, epoch=epoch, train_loss=epoch_loss)
        result.epoch_losses.append(epoch_loss)
        _retain_newest(run, config.retain_checkpoints)
        log.info("policy epoch %d: action loss %.6f", epoch, epoch_loss)
    tape.clear()
    result.checkpoints = [str(p) for p in run.list_checkpoints("policy")]

    if model is not None and model.params.checksum() != encoder_checksum:
        raise PipelineError("frozen TrajNet parameters changed during policy training")
    return result


def _retain_newest(run: RunDir, keep: int) -> None:
    for stale in run.list_checkpoints("policy")[:-keep]:
        stale.unlink()
