"""Saving and restoring TrajNet checkpoints."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from ..data import DatasetMeta, NormStats
from ..numeric import Adam, ShapeMismatch
from ..utils.checkpoint import read_checkpoint, save_checkpoint
from ..utils.error import CheckpointFormatError, IncompatibleError, PipelineError
from .config import TrajNetConfig
from .model import TrajNet

COMPONENT = "TRAJNET"
ADAM_M = "adam.m."
ADAM_V = "adam.v."


@dataclass
class TrajNetBundle:
    """
    A restored TrajNet with everything needed to feed it.

    Attributes:
        model (TrajNet): Parameters and layout
        stats (NormStats): Normalization statistics of its training split
        dataset_meta (DatasetMeta): Metadata of its training dataset
        meta (Dict): Training metadata (seed, epoch, validation loss, optimizer step)
    """

    model: TrajNet
    stats: NormStats
    dataset_meta: DatasetMeta
    meta: Dict[str, Any] = field(default_factory=dict)
    path: Optional[Path] = None

    @property
    def config(self) -> TrajNetConfig:
        return self.model.config


def save_trajnet(path, model: TrajNet, stats: NormStats, dataset_meta: DatasetMeta,
                 optimizer: Optional[Adam] = None, **meta) -> Path:
    tensors = dict(model.params.state_dict())
    tensors.update(stats.to_arrays())
    header_meta = {"dataset": dataset_meta.to_dict(), "dims": model.dims(), **meta}
    if optimizer is not None:
        header_meta["adam"] = {
            "step": optimizer.state.step, "lr": optimizer.state.lr,
            "beta1": optimizer.state.beta1, "beta2": optimizer.state.beta2, "eps": optimizer.state.eps,
        }
        for name in model.params:
            tensors[ADAM_M + name] = optimizer.state.m[name]
            tensors[ADAM_V + name] = optimizer.state.v[name]
    return save_checkpoint(path, COMPONENT, model.config.to_dict(), header_meta, tensors)


def load_trajnet(path, with_optimizer: bool = False):
    """
    Restore a TrajNet checkpoint.

    Returns:
        TrajNetBundle, or ``(TrajNetBundle, Adam)`` with ``with_optimizer``
    """
    data = read_checkpoint(path, COMPONENT)
    try:
        config = TrajNetConfig.from_dict(data.config)
        dataset_meta = DatasetMeta.from_dict(data.meta["dataset"])
        dims = data.meta["dims"]
        model = TrajNet(config, dims["state_dim"], dims["action_dim"], dims["goal_width"])
        params = {n: a for n, a in data.tensors.items() if not n.startswith(("adam.", "norm."))}
        model.params.load_state_dict(params)
        stats = NormStats.from_arrays(data.tensors, dataset_meta)
    except (KeyError, TypeError, ShapeMismatch) as e:
        raise CheckpointFormatError(path, f"header and tensor table disagree ({e})")
    except PipelineError as e:
        if isinstance(e, CheckpointFormatError):
            raise
        raise CheckpointFormatError(path, str(e))
    bundle = TrajNetBundle(model, stats, dataset_meta, data.meta, Path(path))
    if not with_optimizer:
        return bundle
    if "adam" not in data.meta:
        raise IncompatibleError(f"{path} holds no optimizer state")
    adam = data.meta["adam"]
    optimizer = Adam(model.tensors, adam["lr"], adam["beta1"], adam["beta2"], adam["eps"])
    optimizer.load_state(
        adam["step"],
        {n: data.tensors[ADAM_M + n] for n in model.params},
        {n: data.tensors[ADAM_V + n] for n in model.params},
    )
    return bundle, optimizer


def check_compatible(bundle: TrajNetBundle, meta: DatasetMeta) -> None:
    """Raise IncompatibleError when ``meta`` describes data the model cannot consume."""
    model = bundle.model
    checks = (
        ("state_dim", model.state_dim, meta.state_dim),
        ("action_dim", model.action_dim, meta.action_dim),
        ("goal_width", model.goal_width, meta.goal_width),
        ("goal_mode", bundle.dataset_meta.goal_mode.value, meta.goal_mode.value),
    )
    for name, expected, actual in checks:
        if expected != actual:
            raise IncompatibleError(f"{name}: checkpoint has {expected}, data has {actual}")
