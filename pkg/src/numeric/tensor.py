"""
Dense float64 tensors and the tape that records their history.

A Tape is active inside ``with tape.recording():``. Operations whose inputs
require gradients append an entry (inputs, output, backward rule) to the
active tape; outside any recording block operations build no graph, which is
how frozen and evaluation-time forwards stay gradient-free.
"""

from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .error import NonScalarLoss

_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("active_tape", default=None)


class Tensor:
    """
    Dense row-major float64 array with an optional gradient accumulator.

    Attributes:
        data (np.ndarray): Values, always float64
        requires_grad (bool): Whether backward should populate ``grad``
        grad (np.ndarray | None): Same-shape accumulator
        name (str | None): Parameter name, used by checkpoints and diagnostics
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise NonScalarLoss(self.shape)
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # Operator sugar; the implementations live in ops.py
    def __add__(self, other):
        from .ops import add
        return add(self, other)

    def __radd__(self, other):
        from .ops import add
        return add(self, other)

    def __sub__(self, other):
        from .ops import sub
        return sub(self, other)

    def __mul__(self, other):
        from .ops import mul
        return mul(self, other)

    def __rmul__(self, other):
        from .ops import mul
        return mul(self, other)

    def __neg__(self):
        from .ops import mul
        return mul(self, -1.0)

    def __matmul__(self, other):
        from .ops import matmul
        return matmul(self, other)


@dataclass
class TapeEntry:
    """One recorded operation."""

    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tape:
    """
    Ordered record of differentiable operations.

    Entries are appended in execution order, so an entry's inputs were
    produced by earlier entries (or are leaves). Replaying in reverse visits
    each node once.
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []

    def __len__(self):
        return len(self.entries)

    def recording(self):
        return _Recording(self)

    def record(self, op, inputs, output, backward) -> None:
        self.entries.append(TapeEntry(op, tuple(inputs), output, backward))

    def clear(self) -> None:
        self.entries.clear()


class _Recording:
    def __init__(self, tape: Tape):
        self.tape = tape
        self._token = None

    def __enter__(self):
        self._token = _ACTIVE_TAPE.set(self.tape)
        return self.tape

    def __exit__(self, *exc):
        _ACTIVE_TAPE.reset(self._token)
        return False


def active_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


def backward(loss: Tensor, tape: Tape) -> None:
    """
    Populate ``grad`` of every requires_grad tensor reachable from ``loss``.

    Leaf tensors (not produced on this tape, e.g. parameters) accumulate
    into their existing ``grad``; intermediates receive this call's gradient.

    Raises:
        NonScalarLoss: If ``loss`` has more than one element
    """
    if loss.size != 1:
        raise NonScalarLoss(loss.shape)
    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    tensors: Dict[int, Tensor] = {id(loss): loss}
    produced = set()

    for entry in reversed(tape.entries):
        produced.add(id(entry.output))
        g = grads.get(id(entry.output))
        if g is None:
            continue
        for inp, ig in zip(entry.inputs, entry.backward(g)):
            if ig is None or not inp.requires_grad:
                continue
            key = id(inp)
            tensors[key] = inp
            grads[key] = grads[key] + ig if key in grads else ig

    for key, g in grads.items():
        t = tensors[key]
        if not t.requires_grad:
            continue
        if key in produced or t.grad is None:
            t.grad = np.array(g, dtype=np.float64)
        else:
            t.grad = t.grad + g


def wrap(array: np.ndarray, requires_grad: bool = False) -> Tensor:
    """Wrap an existing float64 array without copying it."""
    t = Tensor.__new__(Tensor)
    t.data = np.asarray(array, dtype=np.float64)
    t.requires_grad = requires_grad
    t.grad = None
    t.name = None
    return t
