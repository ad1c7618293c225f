import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spike.autodiff import (
    Tape, Tensor, absolute, add, concat, finite_diff_grad, layer_norm, linear, matmul,
    max_reduce, mean, mul, no_grad, relative_error, relu, reshape, scale, softmax_rows, sub,
    sum_, swap_last, take, transpose,
)
from spike.errors import DimensionError, NumericError, SpikeError

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def check_gradients(loss_fn, tensors, tol=1e-6):
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    numeric = finite_diff_grad(loss_fn, tensors)
    for tensor, estimate in zip(tensors, numeric):
        assert relative_error(tensor.grad, estimate) < tol, tensor


@pytest.mark.parametrize('name, build', [
    ('add', lambda a, b: sum_(mul(add(a, b), add(a, b)))),
    ('sub', lambda a, b: sum_(mul(sub(a, b), a))),
    ('mul', lambda a, b: sum_(mul(a, b))),
    ('scale', lambda a, b: sum_(mul(scale(a, 2.5), b))),
    ('relu', lambda a, b: sum_(mul(relu(a), b))),
    ('absolute', lambda a, b: sum_(absolute(sub(a, b)))),
    ('mean', lambda a, b: mean(mul(a, b))),
    ('reshape', lambda a, b: sum_(mul(reshape(a, (2, 6)), reshape(b, (2, 6))))),
    ('transpose', lambda a, b: sum_(mul(transpose(a), transpose(b)))),
    ('swap_last', lambda a, b: sum_(mul(swap_last(a), swap_last(b)))),
    ('matmul', lambda a, b: sum_(mul(matmul(a, swap_last(b)), matmul(a, swap_last(b))))),
    ('concat', lambda a, b: sum_(mul(concat([a, b], axis=0), concat([b, a], axis=0)))),
    ('take', lambda a, b: sum_(mul(take(a, [2, 0, 2], axis=0), take(b, [1, 1, 0], axis=0)))),
    ('max_reduce', lambda a, b: sum_(mul(max_reduce(a, axis=1), max_reduce(b, axis=1)))),
    ('softmax_rows', lambda a, b: sum_(mul(softmax_rows(a), b))),
])
def test_op_gradients_match_finite_differences(name, build):
    rng = np.random.default_rng(len(name))
    a, b = param(rng, 3, 4), param(rng, 3, 4)
    check_gradients(lambda: build(a, b), [a, b])


def test_linear_and_layer_norm_gradients():
    rng = np.random.default_rng(5)
    x = param(rng, 2, 5, 4)
    weight, bias = param(rng, 3, 4), param(rng, 3)
    gain, shift = param(rng, 3), param(rng, 3)
    target = rng.normal(size=(2, 5, 3))

    def loss():
        h = layer_norm(linear(x, weight, bias), gain, shift)
        return sum_(mul(h, Tensor(target)))

    check_gradients(loss, [x, weight, bias, gain, shift])


def test_broadcast_gradient_sums_back_to_operand_shape():
    rng = np.random.default_rng(0)
    x, b = param(rng, 4, 3), param(rng, 3)
    with Tape() as tape:
        loss = sum_(add(x, b))
    tape.backward(loss)
    np.testing.assert_array_equal(b.grad, np.full(3, 4.0))


def test_max_reduce_ties_send_gradient_to_first_index():
    x = Tensor([[1.0, 3.0, 3.0], [2.0, 2.0, 0.0]], requires_grad=True)
    with Tape() as tape:
        loss = sum_(max_reduce(x, axis=1))
    tape.backward(loss)
    np.testing.assert_array_equal(x.grad, [[0, 1, 0], [1, 0, 0]])


def test_gradients_accumulate_until_zeroed():
    x = Tensor([1.0, 2.0], requires_grad=True)
    for _ in range(2):
        with Tape() as tape:
            loss = sum_(mul(x, x))
        tape.backward(loss)
    np.testing.assert_array_equal(x.grad, [4.0, 8.0])
    x.zero_grad()
    assert x.grad is None


def test_reused_tensor_gets_summed_adjoint():
    x = Tensor([3.0], requires_grad=True)
    with Tape() as tape:
        y = mul(x, x)
        loss = sum_(add(y, y))
    tape.backward(loss)
    np.testing.assert_allclose(x.grad, [12.0])


def test_no_grad_records_nothing():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        with no_grad():
            y = mul(x, x)
    assert len(tape) == 0
    assert not y.requires_grad


def test_backward_requires_scalar_loss():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        y = mul(x, x)
    with pytest.raises(DimensionError):
        tape.backward(y)


def test_backward_rejects_loss_from_another_tape():
    x = Tensor([1.0], requires_grad=True)
    with Tape():
        loss = sum_(mul(x, x))
    with pytest.raises(SpikeError):
        Tape().backward(loss)


def test_clear_releases_nodes():
    x = Tensor([1.0], requires_grad=True)
    with Tape() as tape:
        sum_(mul(x, x))
    assert len(tape) == 2
    tape.clear()
    assert len(tape) == 0


def test_tapes_are_thread_local():
    counts = {}

    def record(name, n):
        x = Tensor([1.0], requires_grad=True)
        with Tape() as tape:
            for _ in range(n):
                x = scale(x, 1.0)
        counts[name] = len(tape)

    threads = [threading.Thread(target=record, args=(f't{n}', n)) for n in (3, 7)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert counts == {'t3': 3, 't7': 7}


def test_shape_mismatch_raises_dimension_error():
    with pytest.raises(DimensionError) as info:
        add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 3))))
    assert '(2, 3)' in str(info.value) and '(4, 3)' in str(info.value)
    with pytest.raises(DimensionError):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_softmax_rejects_non_finite_input():
    with pytest.raises(NumericError):
        softmax_rows(Tensor([[0.0, np.nan]]))


def test_softmax_is_stable_for_large_inputs():
    y = softmax_rows(Tensor([[1000.0, 1000.0, -1000.0]])).data
    np.testing.assert_allclose(y, [[0.5, 0.5, 0.0]])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=finite))
def test_softmax_rows_sum_to_one(values):
    y = softmax_rows(Tensor(values)).data
    assert np.all(y >= 0)
    np.testing.assert_allclose(y.sum(axis=-1), 1.0, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=finite))
def test_max_reduce_matches_python_max(values):
    out = max_reduce(Tensor(values), axis=1).data
    expected = [max(row) for row in values.tolist()]
    np.testing.assert_array_equal(out, expected)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 2 ** 31))
def test_matmul_is_associative(m, k, n, p, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (Tensor(rng.uniform(-1, 1, size=s)) for s in ((m, k), (k, n), (n, p)))
    left = matmul(matmul(a, b), c).data
    right = matmul(a, matmul(b, c)).data
    np.testing.assert_allclose(left, right, rtol=1e-10, atol=1e-12)


def test_layer_norm_output_is_normalised():
    rng = np.random.default_rng(2)
    x = Tensor(rng.normal(loc=3.0, scale=2.0, size=(4, 8)))
    y = layer_norm(x, Tensor(np.ones(8)), Tensor(np.zeros(8))).data
    np.testing.assert_allclose(y.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(y.std(axis=-1), 1.0, atol=1e-5)
