"""Saving and restoring policy checkpoints."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from ..data import DatasetMeta, NormStats
from ..numeric import Adam, ShapeMismatch
from ..trajnet import TrajNetBundle, load_trajnet
from ..utils.checkpoint import file_digest, read_checkpoint, save_checkpoint
from ..utils.error import CheckpointFormatError, IncompatibleError, PipelineError
from .config import Conditioning, PolicyConfig
from .policynet import Policy

COMPONENT = "POLICY"


@dataclass
class PolicyBundle:
    """
    A restored policy together with the frozen TrajNet it conditions on.

    Attributes:
        policy (Policy): MLP parameters and layout
        stats (NormStats): Normalization shared with the TrajNet
        trajnet (TrajNetBundle | None): Absent for conditioning ``none``
        history (int): History length the conditioning consumes
    """

    policy: Policy
    stats: NormStats
    dataset_meta: DatasetMeta
    trajnet: Optional[TrajNetBundle] = None
    history: int = 1
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def conditioning(self) -> Conditioning:
        return self.policy.config.conditioning


def save_policy(path, policy: Policy, stats: NormStats, dataset_meta: DatasetMeta, history: int,
                trajnet_path=None, optimizer: Optional[Adam] = None, **meta) -> Path:
    tensors = dict(policy.params.state_dict())
    tensors.update(stats.to_arrays())
    header_meta = {"dataset": dataset_meta.to_dict(), "dims": policy.dims(), "history": history, **meta}
    if trajnet_path is not None:
        header_meta["trajnet_path"] = str(Path(trajnet_path).resolve())
        header_meta["trajnet_sha256"] = file_digest(trajnet_path)
    if optimizer is not None:
        header_meta["adam_step"] = optimizer.state.step
        for name in policy.params:
            tensors["adam.m." + name] = optimizer.state.m[name]
            tensors["adam.v." + name] = optimizer.state.v[name]
    return save_checkpoint(path, COMPONENT, policy.config.to_dict(), header_meta, tensors)


def load_policy(path, trajnet_path=None) -> PolicyBundle:
    """
    Restore a policy and, unless its conditioning is ``none``, its TrajNet.

    The TrajNet file must hash to the digest recorded at training time.

    Args:
        trajnet_path: Overrides the TrajNet location stored in the checkpoint
    """
    data = read_checkpoint(path, COMPONENT)
    try:
        config = PolicyConfig.from_dict(data.config)
        dataset_meta = DatasetMeta.from_dict(data.meta["dataset"])
        dims = data.meta["dims"]
        policy = Policy(config, dims["state_dim"], dims["action_dim"], dims["goal_width"], dims["cond_width"])
        policy.params.load_state_dict({n: a for n, a in data.tensors.items() if not n.startswith(("adam.", "norm."))})
        stats = NormStats.from_arrays(data.tensors, dataset_meta)
        history = int(data.meta["history"])
    except (KeyError, TypeError, ShapeMismatch) as e:
        raise CheckpointFormatError(path, f"header and tensor table disagree ({e})")
    except PipelineError as e:
        if isinstance(e, CheckpointFormatError):
            raise
        raise CheckpointFormatError(path, str(e))

    trajnet = None
    if config.conditioning is not Conditioning.NONE:
        trajnet_path = trajnet_path or data.meta.get("trajnet_path")
        if trajnet_path is None:
            raise IncompatibleError(f"{path} does not name its TrajNet checkpoint")
        digest = file_digest(trajnet_path)
        if digest != data.meta.get("trajnet_sha256"):
            raise IncompatibleError(f"TrajNet {trajnet_path} differs from the one the policy was trained against")
        trajnet = load_trajnet(trajnet_path)
        trajnet.model.params.freeze()
    return PolicyBundle(policy, stats, dataset_meta, trajnet, history, data.meta)
