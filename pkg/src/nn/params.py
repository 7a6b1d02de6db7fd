"""
Named parameter registry and initialization rules.

Initialization: linear weights and learned embeddings ~ Normal(0, 0.02^2),
biases 0, LayerNorm gain 1 and bias 0. Each tensor draws from a stream split
off the store's stream by the parameter name, so values do not depend on the
order in which parameters are created.
"""

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from ..numeric import RngStream, ShapeMismatch, Tensor
from ..utils.error import IncompatibleError

INIT_STD = 0.02


@dataclass
class LinearParams:
    """``y = x W^T + b`` with ``weight`` [out x in] and ``bias`` [out]."""

    weight: Tensor
    bias: Tensor

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]


@dataclass
class LayerNormParams:
    gain: Tensor
    bias: Tensor


@dataclass
class AttentionParams:
    """
    Multi-head self-attention projections.

    The per-head query/key/value projections are stored stacked as d x d
    matrices; head ``i`` owns rows ``i*d/h : (i+1)*d/h``.
    """

    query: LinearParams
    key: LinearParams
    value: LinearParams
    output: LinearParams
    n_heads: int

    @property
    def width(self) -> int:
        return self.query.out_features

    @property
    def head_width(self) -> int:
        return self.width // self.n_heads


@dataclass
class BlockParams:
    """Pre-norm transformer block: attention and a 4d GELU feed-forward."""

    attention: AttentionParams
    norm_attention: LayerNormParams
    norm_feedforward: LayerNormParams
    ff_in: LinearParams
    ff_out: LinearParams


class ParameterStore:
    """
    Ordered registry of trainable tensors.

    Attributes:
        tensors (Dict[str, Tensor]): Parameters in registration order
    """

    def __init__(self, rng: Optional[RngStream] = None, std: float = INIT_STD):
        self.rng = rng or RngStream(0)
        self.std = std
        self.tensors: Dict[str, Tensor] = {}

    def _register(self, name: str, data: np.ndarray) -> Tensor:
        if name in self.tensors:
            raise IncompatibleError(f"parameter {name} registered twice")
        t = Tensor(data, requires_grad=True, name=name)
        self.tensors[name] = t
        return t

    # Initialization rules
    def normal(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, self.rng.split(name).normal(0.0, self.std, size=shape))

    def zeros(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, np.zeros(shape))

    def ones(self, name: str, shape: Tuple[int, ...]) -> Tensor:
        return self._register(name, np.ones(shape))

    def linear(self, name: str, in_dim: int, out_dim: int) -> LinearParams:
        return LinearParams(self.normal(f"{name}.weight", (out_dim, in_dim)), self.zeros(f"{name}.bias", (out_dim,)))

    def layer_norm(self, name: str, width: int) -> LayerNormParams:
        return LayerNormParams(self.ones(f"{name}.gain", (width,)), self.zeros(f"{name}.bias", (width,)))

    def attention(self, name: str, width: int, n_heads: int) -> AttentionParams:
        if width % n_heads != 0:
            raise IncompatibleError(f"d_model={width} is not divisible by n_heads={n_heads}")
        return AttentionParams(
            query=self.linear(f"{name}.query", width, width),
            key=self.linear(f"{name}.key", width, width),
            value=self.linear(f"{name}.value", width, width),
            output=self.linear(f"{name}.output", width, width),
            n_heads=n_heads,
        )

    def block(self, name: str, width: int, n_heads: int) -> BlockParams:
        return BlockParams(
            attention=self.attention(f"{name}.attn", width, n_heads),
            norm_attention=self.layer_norm(f"{name}.ln_attn", width),
            norm_feedforward=self.layer_norm(f"{name}.ln_ff", width),
            ff_in=self.linear(f"{name}.ff_in", width, 4 * width),
            ff_out=self.linear(f"{name}.ff_out", 4 * width, width),
        )

    # Registry access
    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __len__(self) -> int:
        return len(self.tensors)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def items(self):
        return self.tensors.items()

    def count(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load_state_dict(self, arrays: Mapping[str, np.ndarray]) -> None:
        missing = [n for n in self.tensors if n not in arrays]
        unexpected = [n for n in arrays if n not in self.tensors]
        if missing or unexpected:
            raise IncompatibleError(f"parameter names differ (missing={missing}, unexpected={unexpected})")
        for name, t in self.tensors.items():
            if arrays[name].shape != t.shape:
                raise ShapeMismatch(f"load {name}", t.shape, arrays[name].shape)
            t.data = np.array(arrays[name], dtype=np.float64)
            t.grad = None

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for name, t in self.tensors.items():
            digest.update(name.encode("utf-8"))
            digest.update(t.data.astype("<f8").tobytes())
        return digest.hexdigest()

    def freeze(self) -> None:
        for t in self.tensors.values():
            t.requires_grad = False
            t.grad = None
