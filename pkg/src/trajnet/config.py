"""TrajNet hyperparameters."""

from dataclasses import dataclass
from typing import List, Optional, Union

from ..data import DYNAMIC, DatasetMeta, Objective
from ..utils.config import ConfigSection
from ..utils.error import UsageError

# (k, p) per environment at desk scale
DEFAULT_WINDOWS = {"minimaze": (10, 40), "linerun": (5, 20)}


@dataclass
class TrajNetConfig(ConfigSection):
    """
    Stage-1 model and training settings.

    ``k``, ``p`` and ``reconstruction_subspace`` default to ``None`` and are
    filled in from the dataset by ``resolve``.
    """

    SECTION = "trajnet"

    d_model: int = 64
    n_heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 1
    n_slots: int = 4
    k: Optional[int] = None
    p: Optional[int] = None
    objective: Objective = Objective.MAE_RC
    mask_ratio: Union[str, float] = DYNAMIC
    dropout: float = 0.1
    learning_rate: float = 1e-4
    goal_conditioning: bool = True
    include_actions: bool = False
    reconstruction_subspace: Optional[List[int]] = None
    loss_masked_only: bool = False
    batch_size: int = 256
    epochs: int = 20
    steps_per_epoch: int = 20
    validation_samples: int = 256
    validation_seed: int = 2024

    def __post_init__(self):
        self.objective = Objective.parse(self.objective)
        if self.reconstruction_subspace is not None:
            self.reconstruction_subspace = [int(i) for i in self.reconstruction_subspace]

    def validate(self) -> None:
        if self.d_model < 2 or self.d_model % 2:
            raise UsageError(f"trajnet.d_model must be even and >= 2, got {self.d_model}")
        if self.n_heads < 1 or self.d_model % self.n_heads:
            raise UsageError(f"trajnet.d_model={self.d_model} is not divisible by n_heads={self.n_heads}")
        if self.n_slots < 1:
            raise UsageError(f"trajnet.n_slots must be >= 1, got {self.n_slots}")
        if self.encoder_layers < 1 or self.decoder_layers < 1:
            raise UsageError("trajnet needs at least one encoder and one decoder layer")
        if self.k is not None and self.k < 1:
            raise UsageError(f"trajnet.k must be >= 1, got {self.k}")
        if self.p is not None and self.p < 1:
            raise UsageError(f"trajnet.p must be >= 1, got {self.p}")
        if not 0.0 <= self.dropout < 1.0:
            raise UsageError(f"trajnet.dropout must be in [0, 1), got {self.dropout}")
        if self.mask_ratio != DYNAMIC:
            if isinstance(self.mask_ratio, str) or not 0.0 <= float(self.mask_ratio) < 1.0:
                raise UsageError(f"trajnet.mask_ratio must be '{DYNAMIC}' or in [0, 1), got {self.mask_ratio}")
        for name in ("batch_size", "epochs", "steps_per_epoch", "validation_samples"):
            if getattr(self, name) < 1:
                raise UsageError(f"trajnet.{name} must be >= 1")

    @property
    def window(self) -> int:
        return self.k + self.p

    @property
    def recon_width(self) -> int:
        return len(self.reconstruction_subspace)

    def resolve(self, meta: DatasetMeta) -> "TrajNetConfig":
        """Fill dataset-dependent defaults and check them against ``meta``."""
        k, p = DEFAULT_WINDOWS.get(meta.env_id, (10, 40))
        subspace = self.reconstruction_subspace
        if subspace is None:
            if self.include_actions or meta.env_id != "minimaze":
                subspace = list(range(meta.state_dim))
            else:
                subspace = list(meta.goal_subspace)
        if any(i < 0 or i >= meta.state_dim for i in subspace) or not subspace:
            raise UsageError(f"trajnet.reconstruction_subspace {subspace} invalid for state_dim {meta.state_dim}")
        return self.replace(
            k=self.k if self.k is not None else k,
            p=self.p if self.p is not None else p,
            reconstruction_subspace=subspace,
        )
