"""
Differentiable tensor operations.

Every operation computes its forward value with numpy, refuses non-finite
results, and registers a backward rule on the active tape when any input
requires gradients.

Broadcasting follows one rule for arithmetic: shapes are equal, one operand
is a scalar, or one operand's shape is a trailing suffix of the other's.
"""

import math
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .error import EmptyMask, InvalidArgument, NonFiniteValue, ShapeMismatch
from .rng import RngStream
from .tensor import Tensor, active_tape, wrap

Operand = Union[Tensor, float, int, np.ndarray]

GELU_COEF = 0.044715
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class Activation(str, Enum):
    GELU = "gelu"
    RELU = "relu"


def as_tensor(x: Operand) -> Tensor:
    return x if isinstance(x, Tensor) else wrap(np.asarray(x, dtype=np.float64))


def _emit(op: str, inputs: Sequence[Tensor], out: np.ndarray, backward) -> Tensor:
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue(op)
    tape = active_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    result = wrap(out, requires_grad=needs_grad)
    if needs_grad:
        tape.record(op, inputs, result, backward)
    return result


def _broadcast_shape(op, a, b):
    if a == b:
        return a
    if len(b) == 0 or (len(b) <= len(a) and a[len(a) - len(b):] == b):
        return a
    if len(a) == 0 or (len(a) <= len(b) and b[len(b) - len(a):] == a):
        return b
    raise ShapeMismatch(op, a, b)


def _sum_to_shape(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcast gradient back onto an operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ============================================================================
# Elementwise arithmetic
# ============================================================================


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a.shape, b.shape)
    return _emit(
        "add", (a, b), a.data + b.data,
        lambda g: (_sum_to_shape(g, a.shape), _sum_to_shape(g, b.shape)),
    )


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a.shape, b.shape)
    return _emit(
        "sub", (a, b), a.data - b.data,
        lambda g: (_sum_to_shape(g, a.shape), _sum_to_shape(-g, b.shape)),
    )


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a.shape, b.shape)
    return _emit(
        "mul", (a, b), a.data * b.data,
        lambda g: (_sum_to_shape(g * b.data, a.shape), _sum_to_shape(g * a.data, b.shape)),
    )


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a.shape, b.shape)
    return _emit(
        "div", (a, b), a.data / b.data,
        lambda g: (
            _sum_to_shape(g / b.data, a.shape),
            _sum_to_shape(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def elementwise(op_kind: str, a: Operand, b: Operand) -> Tensor:
    """Dispatch ``add``/``sub``/``mul``/``div`` by name."""
    table = {"add": add, "sub": sub, "mul": mul, "div": div}
    if op_kind not in table:
        raise InvalidArgument("op_kind", op_kind)
    return table[op_kind](a, b)


# ============================================================================
# Linear algebra and shape manipulation
# ============================================================================


def matmul(a: Operand, b: Operand) -> Tensor:
    """
    Matrix product over the last two dimensions.

    ``b`` is either a plain matrix shared by every leading index of ``a`` or
    has the same leading dimensions as ``a``.
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch("matmul", a.shape, b.shape)
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise ShapeMismatch("matmul", a.shape, b.shape)

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        if b.ndim == 2:
            k, n = b.shape
            gb = a.data.reshape(-1, k).T @ g.reshape(-1, n)
        else:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return ga, gb

    return _emit("matmul", (a, b), np.matmul(a.data, b.data), backward)


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return _emit("transpose", (x,), np.transpose(x.data, axes), lambda g: (np.transpose(g, inverse),))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeMismatch("reshape", x.shape, tuple(shape))
    return _emit("reshape", (x,), out, lambda g: (g.reshape(x.shape),))


def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeMismatch("concat", *[t.shape for t in tensors])
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _emit("concat", tensors, out, lambda g: tuple(np.split(g, bounds, axis=axis)))


def narrow(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """Slice ``[start, stop)`` along one axis."""
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def backward(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return _emit("narrow", (x,), x.data[index], backward)


def broadcast_to(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    if _broadcast_shape("broadcast_to", shape, x.shape) != shape:
        raise ShapeMismatch("broadcast_to", x.shape, shape)
    out = np.broadcast_to(x.data, shape).copy()
    return _emit("broadcast_to", (x,), out, lambda g: (_sum_to_shape(g, x.shape),))


def where(condition: np.ndarray, a: Operand, b: Operand) -> Tensor:
    """Select ``a`` where ``condition`` holds and ``b`` elsewhere (numpy broadcasting)."""
    a, b = as_tensor(a), as_tensor(b)
    condition = np.asarray(condition, dtype=bool)
    try:
        out = np.where(condition, a.data, b.data)
    except ValueError:
        raise ShapeMismatch("where", condition.shape, a.shape, b.shape)

    def backward(g):
        return (
            _sum_to_shape(np.where(condition, g, 0.0), a.shape),
            _sum_to_shape(np.where(condition, 0.0, g), b.shape),
        )

    return _emit("where", (a, b), out, backward)


def reduce_sum(x: Tensor, axis: Optional[int] = None) -> Tensor:
    if axis is None:
        return _emit("reduce_sum", (x,), np.asarray(x.data.sum()), lambda g: (np.full(x.shape, float(g)),))
    axis = axis % x.ndim
    return _emit(
        "reduce_sum", (x,), x.data.sum(axis=axis),
        lambda g: (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),),
    )


def mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return mul(reduce_sum(x, axis), 1.0 / count)


# ============================================================================
# Neural-network primitives
# ============================================================================


def softmax_lastdim(x: Tensor, exclude: Optional[np.ndarray] = None) -> Tensor:
    """
    Softmax over the last dimension with max-subtraction.

    ``exclude`` marks entries that receive a -inf logit; it broadcasts
    against ``x``. Every slice must keep at least one entry.
    """
    if x.shape[-1] < 1:
        raise ShapeMismatch("softmax", x.shape)
    z = x.data
    if exclude is not None:
        exclude = np.broadcast_to(np.asarray(exclude, dtype=bool), x.shape)
        if np.any(np.all(exclude, axis=-1)):
            raise InvalidArgument("attn_mask", "excludes every key for some query")
        z = np.where(exclude, -np.inf, z)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _emit("softmax", (x,), y, backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """``(x - mean) / sqrt(var + eps) * gain + bias`` over the last dimension (population variance)."""
    if eps <= 0:
        raise InvalidArgument("eps", eps)
    width = x.shape[-1]
    if gain.shape != (width,) or bias.shape != (width,):
        raise ShapeMismatch("layer_norm", x.shape, gain.shape, bias.shape)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv

    def backward(g):
        gx = g * gain.data
        dx = inv * (
            gx - gx.mean(axis=-1, keepdims=True)
            - xhat * (gx * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(x.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return _emit("layer_norm", (x, gain, bias), xhat * gain.data + bias.data, backward)


def gelu(x: Tensor) -> Tensor:
    """tanh approximation of GELU."""
    v = x.data
    t = np.tanh(SQRT_2_OVER_PI * (v + GELU_COEF * v ** 3))

    def backward(g):
        du = SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_COEF * v * v)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du),)

    return _emit("gelu", (x,), 0.5 * v * (1.0 + t), backward)


def relu(x: Tensor) -> Tensor:
    positive = x.data > 0
    return _emit("relu", (x,), np.where(positive, x.data, 0.0), lambda g: (g * positive,))


def activation(kind: Union[Activation, str], x: Tensor) -> Tensor:
    kind = Activation(kind)
    return gelu(x) if kind is Activation.GELU else relu(x)


def dropout(x: Tensor, rate: float, rng: Optional[RngStream], training: bool) -> Tensor:
    """Inverted dropout; identity in evaluation mode or at rate 0."""
    if not 0.0 <= rate < 1.0:
        raise InvalidArgument("rate", rate)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise InvalidArgument("rng", None)
    scale = 1.0 / (1.0 - rate)
    keep = (rng.uniform(size=x.shape) >= rate) * scale
    return _emit("dropout", (x,), x.data * keep, lambda g: (g * keep,))


def mse_loss(pred: Tensor, target: Operand, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Mean squared error over positions with nonzero mask weight.

    ``mask`` covers a leading prefix of ``pred``'s dimensions (e.g. batch and
    position) and broadcasts over the rest; the mean runs over every element
    of the selected positions.
    """
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeMismatch("mse_loss", pred.shape, target.shape)
    if mask is None:
        weights = np.ones(pred.shape)
        live = pred.size
    else:
        mask = np.asarray(mask, dtype=np.float64)
        if mask.shape != pred.shape[: mask.ndim]:
            raise ShapeMismatch("mse_loss", pred.shape, mask.shape)
        trailing = int(np.prod(pred.shape[mask.ndim:], dtype=np.int64))
        live = int(np.count_nonzero(mask)) * trailing
        weights = np.broadcast_to(mask.reshape(mask.shape + (1,) * (pred.ndim - mask.ndim)), pred.shape)
    if live == 0:
        raise EmptyMask("mse_loss")
    diff = pred.data - target.data
    value = (weights * diff * diff).sum() / live

    def backward(g):
        grad = float(g) * 2.0 * weights * diff / live
        return grad, -grad

    return _emit("mse_loss", (pred, target), np.asarray(value), backward)
