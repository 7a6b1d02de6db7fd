"""Central finite-difference checks for analytic gradients."""

from typing import Callable, Dict, Mapping, Optional

import numpy as np

from .rng import RngStream
from .tensor import Tape, Tensor, backward


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """``||a - n|| / (||a|| + ||n||)``, zero when both vanish."""
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale < 1e-12:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def analytic_gradients(loss_fn: Callable[[], Tensor], params: Mapping[str, Tensor]) -> Dict[str, np.ndarray]:
    for p in params.values():
        p.grad = None
    tape = Tape()
    with tape.recording():
        loss = loss_fn()
    backward(loss, tape)
    return {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }


def numerical_gradient(loss_fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-6,
                       indices: Optional[np.ndarray] = None) -> np.ndarray:
    """Central differences of ``loss_fn`` w.r.t. the flat entries ``indices`` of ``tensor``."""
    flat = tensor.data.reshape(-1)
    indices = np.arange(flat.size) if indices is None else indices
    out = np.zeros(len(indices))
    for j, i in enumerate(indices):
        original = flat[i]
        flat[i] = original + h
        plus = loss_fn().item()
        flat[i] = original - h
        minus = loss_fn().item()
        flat[i] = original
        out[j] = (plus - minus) / (2.0 * h)
    return out


def check_gradients(loss_fn: Callable[[], Tensor], params: Mapping[str, Tensor], h: float = 1e-6,
                    max_entries: Optional[int] = None, rng: Optional[RngStream] = None) -> Dict[str, float]:
    """
    Compare analytic and numerical gradients for every tensor in ``params``.

    With ``max_entries`` set, each tensor is checked at that many randomly
    chosen entries. Returns the relative error per tensor name.
    """
    analytic = analytic_gradients(loss_fn, params)
    rng = rng or RngStream(0)
    errors = {}
    for name, p in params.items():
        if max_entries is not None and p.size > max_entries:
            indices = np.sort(rng.split(name).choice(p.size, size=max_entries, replace=False))
        else:
            indices = np.arange(p.size)
        numeric = numerical_gradient(loss_fn, p, h, indices)
        errors[name] = relative_error(analytic[name].reshape(-1)[indices], numeric)
    return errors
