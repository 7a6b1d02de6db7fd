"""Adam optimizer over named tensors."""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from .error import InvalidArgument, ShapeMismatch
from .tensor import Tensor


@dataclass
class AdamState:
    """
    Moment estimates and hyperparameters of one Adam optimizer.

    Attributes:
        m, v: First/second moment per parameter name
        step: Number of updates applied so far
    """

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


class Adam:
    """
    Bias-corrected Adam without weight decay or clipping.

    Parameters without a gradient are treated as having a zero gradient.
    """

    def __init__(self, params: Mapping[str, Tensor], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise InvalidArgument("lr", lr)
        self.params = dict(params)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        for name, p in self.params.items():
            self.state.m[name] = np.zeros_like(p.data)
            self.state.v[name] = np.zeros_like(p.data)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> None:
        s = self.state
        s.step += 1
        bc1 = 1.0 - s.beta1 ** s.step
        bc2 = 1.0 - s.beta2 ** s.step
        for name, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if g.shape != p.shape or s.m[name].shape != p.shape:
                raise ShapeMismatch("adam_step", p.shape, g.shape)
            s.m[name] = s.beta1 * s.m[name] + (1.0 - s.beta1) * g
            s.v[name] = s.beta2 * s.v[name] + (1.0 - s.beta2) * (g * g)
            m_hat = s.m[name] / bc1
            v_hat = s.v[name] / bc2
            p.data = p.data - s.lr * m_hat / (np.sqrt(v_hat) + s.eps)

    def load_state(self, step: int, m: Mapping[str, np.ndarray], v: Mapping[str, np.ndarray]) -> None:
        for name, p in self.params.items():
            if m[name].shape != p.shape or v[name].shape != p.shape:
                raise ShapeMismatch("adam_state", p.shape, m[name].shape)
            self.state.m[name] = np.array(m[name], dtype=np.float64)
            self.state.v[name] = np.array(v[name], dtype=np.float64)
        self.state.step = int(step)


def adam_step(params: Mapping[str, Tensor], state: AdamState) -> AdamState:
    """Functional form: apply one update to ``params`` using ``state`` in place."""
    optimizer = Adam.__new__(Adam)
    optimizer.params = dict(params)
    optimizer.state = state
    for name, p in optimizer.params.items():
        state.m.setdefault(name, np.zeros_like(p.data))
        state.v.setdefault(name, np.zeros_like(p.data))
    optimizer.step()
    return state
