"""
Masking objectives for trajectory representation learning.

Each objective fixes how the history and future segments of a window enter
the encoder and which positions the decoder is trained to reconstruct:

    objective  history      future       reconstruct
    ae-h       unmasked     (absent)     history
    mae-h      random       (absent)     history
    mae-f      unmasked     full         history + future
    mae-rc     random       full         history + future
    mae-all    random       random       history + future

Random segments mask exactly ``round(r * len)`` positions chosen without
replacement, with ``r`` drawn per sample from ``DYNAMIC_RATIOS`` unless a
fixed ratio is configured.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from ..numeric import InvalidArgument, RngStream, ShapeMismatch, Tensor, where
from .error import UnknownObjective

DYNAMIC_RATIOS = (0.0, 0.2, 0.4, 0.6, 0.8)
DYNAMIC = "dynamic"


class Segment(str, Enum):
    ABSENT = "absent"
    UNMASKED = "unmasked"
    RANDOM = "random"
    FULL = "full"


class Objective(str, Enum):
    AE_H = "ae-h"
    MAE_H = "mae-h"
    MAE_F = "mae-f"
    MAE_RC = "mae-rc"
    MAE_ALL = "mae-all"

    @classmethod
    def parse(cls, value: Union["Objective", str]) -> "Objective":
        try:
            return cls(value)
        except ValueError:
            raise UnknownObjective(value)

    @property
    def history(self) -> Segment:
        return _LAYOUT[self][0]

    @property
    def future(self) -> Segment:
        return _LAYOUT[self][1]

    @property
    def has_future(self) -> bool:
        return self.future is not Segment.ABSENT

    @property
    def future_in_encoder(self) -> bool:
        """Whether future positions are encoder input (a fully masked future is left out)."""
        return self.future is Segment.RANDOM


_LAYOUT = {
    Objective.AE_H: (Segment.UNMASKED, Segment.ABSENT),
    Objective.MAE_H: (Segment.RANDOM, Segment.ABSENT),
    Objective.MAE_F: (Segment.UNMASKED, Segment.FULL),
    Objective.MAE_RC: (Segment.RANDOM, Segment.FULL),
    Objective.MAE_ALL: (Segment.RANDOM, Segment.RANDOM),
}


@dataclass
class MaskSpec:
    """
    Mask layout for one sample.

    Attributes:
        input_mask (np.ndarray): Bool flags over the input segments; length k
            when the objective has no future segment, else k+p
        target (np.ndarray): Bool reconstruction-target flags over all k+p positions
        ratio (float): Realized mask ratio r (0 when no segment is random)
    """

    objective: Objective
    k: int
    p: int
    input_mask: np.ndarray
    target: np.ndarray
    ratio: float

    @property
    def encoder_length(self) -> int:
        return self.k + (self.p if self.objective.future_in_encoder else 0)

    @property
    def encoder_mask(self) -> np.ndarray:
        """Flags for the positions actually fed to the encoder."""
        return self.input_mask[: self.encoder_length]

    @property
    def hidden(self) -> np.ndarray:
        """Per-position flag over k+p: True where the encoder did not see the state."""
        if len(self.input_mask) == self.k + self.p:
            return self.input_mask.copy()
        return np.concatenate([self.input_mask, np.ones(self.p, dtype=bool)])


def resolve_ratio(mask_ratio: Union[str, float], rng: RngStream) -> float:
    if mask_ratio == DYNAMIC:
        return float(rng.pick(DYNAMIC_RATIOS))
    ratio = float(mask_ratio)
    if not 0.0 <= ratio < 1.0:
        raise InvalidArgument("mask_ratio", mask_ratio)
    return ratio


def _segment(kind: Segment, length: int, ratio: float, rng: RngStream) -> np.ndarray:
    flags = np.zeros(length, dtype=bool)
    if kind is Segment.FULL:
        flags[:] = True
    elif kind is Segment.RANDOM:
        count = int(round(ratio * length))
        if count:
            flags[rng.choice(length, size=count, replace=False)] = True
    return flags


def build_mask(objective: Union[Objective, str], k: int, p: int, rng: RngStream,
               mask_ratio: Union[str, float] = DYNAMIC) -> MaskSpec:
    """
    Draw a mask for one sample.

    Raises:
        UnknownObjective: ``objective`` is not one of the five names
        InvalidArgument: ``k < 1``, or ``p < 1`` for an objective with a future segment
    """
    objective = Objective.parse(objective)
    if k < 1:
        raise InvalidArgument("k", k)
    if objective.has_future and p < 1:
        raise InvalidArgument("p", p)
    random_segments = Segment.RANDOM in (objective.history, objective.future)
    ratio = resolve_ratio(mask_ratio, rng.split("ratio")) if random_segments else 0.0

    history = _segment(objective.history, k, ratio, rng.split("history"))
    if objective.has_future:
        input_mask = np.concatenate([history, _segment(objective.future, p, ratio, rng.split("future"))])
        target = np.ones(k + p, dtype=bool)
    else:
        input_mask = history
        target = np.concatenate([np.ones(k, dtype=bool), np.zeros(p, dtype=bool)])
    return MaskSpec(objective, k, p, input_mask, target, ratio)


def apply_mask(embeddings: Tensor, input_mask: np.ndarray, mask_token: Tensor,
               positional: Optional[Tensor] = None) -> Tensor:
    """
    Replace masked positions of ``[..., L, d]`` embeddings with the shared
    mask token, then add positional codes ``[L, d]`` if given.
    """
    input_mask = np.asarray(input_mask, dtype=bool)
    if input_mask.shape != embeddings.shape[:-1]:
        raise ShapeMismatch("apply_mask", embeddings.shape, input_mask.shape)
    tokens = where(input_mask[..., None], mask_token, embeddings)
    if positional is not None:
        if positional.shape != embeddings.shape[-2:]:
            raise ShapeMismatch("apply_mask", embeddings.shape, positional.shape)
        tokens = tokens + positional
    return tokens
