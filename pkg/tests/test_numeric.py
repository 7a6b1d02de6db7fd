import math

import numpy as np
import pytest

import utils  # noqa: F401  repo root on sys.path

from src.numeric import (
    Adam, AdamState, EmptyMask, InvalidArgument, NonFiniteValue, NonScalarLoss, ShapeMismatch, Tape, Tensor, add,
    backward, check_gradients, concat, div, dropout, gelu, layer_norm, matmul, mean, mse_loss, mul, narrow,
    RngStream, adam_step, reduce_sum, relu, reshape, softmax_lastdim, sub, transpose, where,
)
from src.utils import NumericalError


def param(rng, shape, low=-1.0, high=1.0):
    return Tensor(rng.uniform(low, high, size=shape), requires_grad=True)


def test_001():
    """Broadcast add sums the gradient over the broadcast dimensions"""
    rng = RngStream(1)
    a, b = param(rng.split("a"), (3, 4)), param(rng.split("b"), (4,))
    tape = Tape()
    with tape.recording():
        loss = reduce_sum(add(a, b))
    backward(loss, tape)
    assert np.allclose(a.grad, np.ones((3, 4)))
    assert np.allclose(b.grad, np.full(4, 3.0))


def test_002():
    """Incompatible shapes raise ShapeMismatch"""
    with pytest.raises(ShapeMismatch):
        add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 2))))
    with pytest.raises(ShapeMismatch):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_003():
    """Ops outside a recording tape leave nothing to differentiate"""
    a = Tensor(np.ones(3), requires_grad=True)
    out = mul(a, 2.0)
    assert not out.requires_grad
    tape = Tape()
    with tape.recording():
        frozen = Tensor(np.ones(3))
        mul(frozen, 2.0)
    assert len(tape) == 0


def test_004():
    """Softmax gives excluded entries zero weight and rows sum to one"""
    x = Tensor(RngStream(2).normal(size=(2, 5)))
    exclude = np.array([[False, True, False, False, True], [True, False, False, False, False]])
    out = softmax_lastdim(x, exclude).data
    assert np.all(out[exclude] == 0.0)
    assert np.allclose(out.sum(axis=-1), 1.0)


def test_005():
    """Softmax with every entry of a row excluded is rejected"""
    x = Tensor(np.zeros((1, 3)))
    with pytest.raises(InvalidArgument):
        softmax_lastdim(x, np.ones((1, 3), dtype=bool))


def test_006():
    """Layer norm output has zero mean and unit population variance"""
    x = Tensor(RngStream(3).normal(2.0, 5.0, size=(4, 6)))
    out = layer_norm(x, Tensor(np.ones(6)), Tensor(np.zeros(6))).data
    assert np.allclose(out.mean(axis=-1), 0.0, atol=1e-12)
    assert np.allclose(out.var(axis=-1), 1.0, atol=1e-4)


def test_007():
    """Layer norm with a non-positive epsilon is rejected"""
    with pytest.raises(InvalidArgument):
        layer_norm(Tensor(np.ones((1, 2))), Tensor(np.ones(2)), Tensor(np.zeros(2)), eps=0.0)


def test_008():
    """Masked MSE averages over live elements only"""
    pred = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    target = np.zeros((2, 2))
    assert mse_loss(pred, target).item() == pytest.approx(7.5)
    assert mse_loss(pred, target, np.array([True, False])).item() == pytest.approx(2.5)


def test_009():
    """An all-zero loss mask raises EmptyMask"""
    with pytest.raises(EmptyMask):
        mse_loss(Tensor(np.ones((2, 2))), np.zeros((2, 2)), np.zeros(2))


def test_010():
    """Dropout is the identity in evaluation mode"""
    x = Tensor(np.ones((3, 3)))
    assert dropout(x, 0.5, None, training=False) is x
    assert dropout(x, 0.0, None, training=True) is x


def test_011():
    """Training-mode dropout zeroes entries and rescales survivors"""
    x = Tensor(np.ones((50, 50)))
    out = dropout(x, 0.25, RngStream(4), training=True).data
    survivors = out[out != 0.0]
    assert np.allclose(survivors, 1.0 / 0.75)
    assert 0.15 < np.mean(out == 0.0) < 0.35


def test_012():
    """Training-mode dropout without a stream or with a bad rate is rejected"""
    x = Tensor(np.ones(4))
    with pytest.raises(InvalidArgument):
        dropout(x, 0.5, None, training=True)
    with pytest.raises(InvalidArgument):
        dropout(x, 1.0, RngStream(0), training=True)


def test_013():
    """Backward from a non-scalar output raises NonScalarLoss"""
    a = Tensor(np.ones(3), requires_grad=True)
    tape = Tape()
    with tape.recording():
        out = mul(a, 2.0)
    with pytest.raises(NonScalarLoss):
        backward(out, tape)


def test_014():
    """Overflow to infinity raises NonFiniteValue, a numerical error"""
    with pytest.raises(NonFiniteValue) as info:
        with np.errstate(over="ignore"):
            mul(Tensor(np.array([1e308])), 1e308)
    assert isinstance(info.value, NumericalError)
    assert info.value.exit_code == 4


def test_015():
    """Leaf gradients accumulate across backward calls until zeroed"""
    a = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    for _ in range(2):
        tape = Tape()
        with tape.recording():
            loss = reduce_sum(mul(a, a))
        backward(loss, tape)
    assert np.allclose(a.grad, 2 * 2 * a.data)
    a.zero_grad()
    assert a.grad is None or np.all(a.grad == 0)


def test_016():
    """Matmul gradients agree with central differences"""
    rng = RngStream(5)
    a, b = param(rng.split("a"), (2, 3, 4)), param(rng.split("b"), (4, 5))
    errors = check_gradients(lambda: mean(mul(matmul(a, b), matmul(a, b))), {"a": a, "b": b})
    assert max(errors.values()) <= 1e-5


def test_017():
    """Layer norm gradients agree with central differences"""
    rng = RngStream(6)
    x, gain, bias = param(rng.split("x"), (3, 5)), param(rng.split("g"), (5,)), param(rng.split("b"), (5,))
    weights = rng.split("w").normal(size=(3, 5))
    errors = check_gradients(lambda: reduce_sum(mul(layer_norm(x, gain, bias), weights)),
                             {"x": x, "gain": gain, "bias": bias})
    assert max(errors.values()) <= 1e-5


def test_018():
    """Softmax, GELU and masked MSE gradients agree with central differences"""
    rng = RngStream(7)
    x = param(rng.split("x"), (2, 3, 4))
    target = rng.split("t").normal(size=(2, 3, 4))
    exclude = np.zeros((2, 3, 4), dtype=bool)
    exclude[0, :, 1] = True
    live = np.array([[True, False, True], [True, True, False]])
    errors = check_gradients(lambda: mse_loss(gelu(softmax_lastdim(x, exclude)), target, live), {"x": x})
    assert errors["x"] <= 1e-5


def test_019():
    """Randomized composite expressions pass the gradient check"""
    builders = [
        lambda a, b, w: reduce_sum(mul(add(a, b), w)),
        lambda a, b, w: reduce_sum(mul(sub(a, b), sub(a, b))),
        lambda a, b, w: reduce_sum(mul(div(a, add(mul(b, b), 1.0)), w)),
        lambda a, b, w: mean(mul(gelu(mul(a, b)), w)),
        lambda a, b, w: reduce_sum(mul(softmax_lastdim(add(a, b)), w)),
        lambda a, b, w: reduce_sum(mul(concat([a, b], axis=0), concat([w, w], axis=0))),
        lambda a, b, w: reduce_sum(mul(narrow(mul(a, b), 1, 1, 3), narrow(w, 1, 1, 3))),
        lambda a, b, w: reduce_sum(mul(where(w.data > 0, a, b), w)),
        lambda a, b, w: reduce_sum(mul(reshape(transpose(mul(a, b), (1, 0)), (-1,)), reshape(transpose(w, (1, 0)), (-1,)))),
        lambda a, b, w: mean(mul(layer_norm(mul(a, b), Tensor(np.ones(4)), Tensor(np.zeros(4))), w)),
    ]
    for trial in range(100):
        rng = RngStream(100 + trial)
        a = param(rng.split("a"), (3, 4))
        b = param(rng.split("b"), (3, 4))
        w = Tensor(rng.split("w").normal(size=(3, 4)))
        build = builders[trial % len(builders)]
        errors = check_gradients(lambda: build(a, b, w), {"a": a, "b": b})
        assert max(errors.values()) <= 1e-5, (trial, errors)


def test_020():
    """ReLU passes the gradient only where its input is positive"""
    x = Tensor(np.array([-1.0, 0.5, 2.0]), requires_grad=True)
    tape = Tape()
    with tape.recording():
        loss = reduce_sum(relu(x))
    backward(loss, tape)
    assert np.array_equal(x.grad, np.array([0.0, 1.0, 1.0]))


def test_021():
    """The first Adam step moves each parameter by lr times the sign of its gradient"""
    p = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    optimizer = Adam({"p": p}, lr=0.1)
    tape = Tape()
    with tape.recording():
        loss = reduce_sum(mul(p, p))
    backward(loss, tape)
    g = p.grad.copy()
    before = p.data.copy()
    optimizer.step()
    expected = before - 0.1 * g / (np.abs(g) + optimizer.state.eps)
    assert np.allclose(p.data, expected, rtol=0, atol=1e-12)
    assert optimizer.state.step == 1


def test_022():
    """Adam minimizes a quadratic bowl"""
    p = Tensor(np.array([2.0, -3.0]), requires_grad=True)
    optimizer = Adam({"p": p}, lr=0.05)
    for _ in range(500):
        optimizer.zero_grad()
        tape = Tape()
        with tape.recording():
            loss = reduce_sum(mul(p, p))
        backward(loss, tape)
        optimizer.step()
    assert np.all(np.abs(p.data) < 0.1)


def test_023():
    """Adam rejects a non-positive learning rate"""
    with pytest.raises(InvalidArgument):
        Adam({"p": Tensor(np.ones(1), requires_grad=True)}, lr=0.0)


def test_024():
    """Streams with the same seed and label draw identical values"""
    a = RngStream(42).split("x").normal(size=5)
    b = RngStream(42).split("x").normal(size=5)
    c = RngStream(42).split("y").normal(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_025():
    """Child streams do not depend on the order they are split or drawn"""
    root = RngStream(9)
    first = root.split("one").uniform(size=3)
    root.split("two").uniform(size=100)
    again = RngStream(9)
    again.split("two").uniform(size=7)
    assert np.array_equal(again.split("one").uniform(size=3), first)


def test_026():
    """Integer draws respect the half-open range and permutations cover every index"""
    rng = RngStream(10)
    draws = rng.integers(3, 7, size=1000)
    assert draws.min() == 3 and draws.max() == 6
    assert sorted(rng.permutation(12).tolist()) == list(range(12))


def test_027():
    """Three Adam steps on a scalar match the bias-corrected update written out by hand"""
    p = Tensor(np.array([0.5]), requires_grad=True)
    state = AdamState(lr=0.01)
    expected, m, v = 0.5, 0.0, 0.0
    for step, g in enumerate([0.3, -1.2, 2.5], start=1):
        p.grad = np.array([g])
        adam_step({"p": p}, state)
        m = 0.9 * m + (1.0 - 0.9) * g
        v = 0.999 * v + (1.0 - 0.999) * (g * g)
        m_hat = m / (1.0 - 0.9 ** step)
        v_hat = v / (1.0 - 0.999 ** step)
        expected = expected - 0.01 * m_hat / (math.sqrt(v_hat) + 1e-8)
        assert p.data[0] == expected
    assert state.step == 3


def test_028():
    """Uniform draws average one half"""
    draws = RngStream(11).uniform(size=100_000)
    assert abs(draws.mean() - 0.5) <= 0.005
    assert draws.min() >= 0.0 and draws.max() < 1.0


def test_029():
    """Dropout at rate one half keeps half the entries and doubles the survivors"""
    out = dropout(Tensor(np.ones(100_000)), 0.5, RngStream(12), training=True).data
    kept = out != 0.0
    assert abs(kept.mean() - 0.5) <= 0.01
    assert np.all(out[kept] == 2.0)


def test_030():
    """The gradient of a summed loss is the sum of the separate gradients"""
    rng = RngStream(13)
    a, b = param(rng.split("a"), (3, 4)), param(rng.split("b"), (3, 4))

    def grads(build):
        a.zero_grad()
        b.zero_grad()
        tape = Tape()
        with tape.recording():
            loss = build()
        backward(loss, tape)
        return a.grad.copy(), b.grad.copy()

    def first():
        return reduce_sum(mul(a, b))

    def second():
        return mean(gelu(sub(mul(a, a), b)))

    joint = grads(lambda: add(first(), second()))
    separate = [x + y for x, y in zip(grads(first), grads(second))]
    for together, apart in zip(joint, separate):
        assert np.allclose(together, apart, rtol=0.0, atol=1e-12)


def test_031():
    """EmptyMask is an InvalidArgument raised from the error module"""
    from src.numeric import error

    assert error.EmptyMask is EmptyMask
    assert issubclass(EmptyMask, InvalidArgument)
    with pytest.raises(error.EmptyMask, match="all weights are zero"):
        mse_loss(Tensor(np.ones(3)), np.zeros(3), np.zeros(3))
