"""
Differentiable primitives over `Tensor`.

Each op computes its forward value with NumPy and, when recording is enabled
and an input requires a gradient, appends a vector-Jacobian product to the
active tape. Binary elementwise ops follow NumPy broadcasting; gradients are
summed back to each operand's shape.
"""

import numpy as np

from spike.autodiff.tape import get_current_tape, is_grad_enabled
from spike.autodiff.tensor import Tensor
from spike.errors import DimensionError, NumericError

LAYER_NORM_EPS = 1e-5


def _pair(a, b):
    """Promote constants to tensors of the other operand's dtype"""
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        b = Tensor(b, dtype=a.dtype)
    elif isinstance(b, Tensor) and not isinstance(a, Tensor):
        a = Tensor(a, dtype=b.dtype)
    elif not isinstance(a, Tensor):
        a, b = Tensor(a), Tensor(b)
    return a, b


def _make(op, data, inputs, backward_fn):
    out = Tensor(data, dtype=data.dtype)
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        get_current_tape().record(op, inputs, out, backward_fn)
    return out


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to `shape`"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op, a, b):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape) from None


# -- elementwise -------------------------------------------------------

def add(a, b):
    a, b = _pair(a, b)
    _broadcast_check('add', a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make('add', a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = _pair(a, b)
    _broadcast_check('sub', a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _make('sub', a.data - b.data, (a, b), backward)


def mul(a, b):
    a, b = _pair(a, b)
    _broadcast_check('mul', a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make('mul', a.data * b.data, (a, b), backward)


def scale(x, factor):
    """Multiply by a Python scalar"""
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return _make('scale', x.data * x.dtype.type(factor), (x,), backward)


def relu(x):
    mask = x.data > 0

    def backward(g):
        return (g * mask,)

    return _make('relu', np.where(mask, x.data, x.dtype.type(0)), (x,), backward)


def absolute(x):
    sign = np.sign(x.data)

    def backward(g):
        return (g * sign,)

    return _make('abs', np.abs(x.data), (x,), backward)


# -- linear algebra ----------------------------------------------------

def matmul(a, b):
    """Matrix product; leading dimensions broadcast like numpy.matmul"""
    a, b = _pair(a, b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError('matmul', a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise DimensionError('matmul', a.shape, b.shape) from None

    def backward(g):
        grad_a = np.matmul(g, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return _make('matmul', np.matmul(a.data, b.data), (a, b), backward)


def linear(x, weight, bias=None):
    """x · weightᵀ (+ bias); weight is stored out×in"""
    out = matmul(x, transpose(weight))
    if bias is not None:
        out = add(out, bias)
    return out


# -- reductions --------------------------------------------------------

def sum_(x, axis=None, keepdims=False):

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _make('sum', np.asarray(x.data.sum(axis=axis, keepdims=keepdims)), (x,), backward)


def mean(x, axis=None, keepdims=False):
    count = x.size if axis is None else x.shape[axis]
    return scale(sum_(x, axis=axis, keepdims=keepdims), 1.0 / count)


def max_reduce(x, axis):
    """Maximum along `axis`; the gradient goes to the first maximal entry"""
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f'max_reduce (axis {axis})', x.shape)
    if x.shape[axis] == 0:
        raise DimensionError(f'max_reduce (empty axis {axis})', x.shape)

    # np.argmax returns the lowest index on ties
    index = np.expand_dims(np.argmax(x.data, axis=axis), axis)
    values = np.take_along_axis(x.data, index, axis=axis)

    def backward(g):
        grad = np.zeros_like(x.data)
        np.put_along_axis(grad, index, np.expand_dims(g, axis), axis=axis)
        return (grad,)

    return _make('max_reduce', np.squeeze(values, axis=axis), (x,), backward)


def softmax_rows(x):
    """Softmax over the last axis, stabilised by the row maximum"""
    if not np.all(np.isfinite(x.data)):
        raise NumericError('softmax_rows', 'non-finite input')
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _make('softmax_rows', y, (x,), backward)


def layer_norm(x, gain, bias, eps=LAYER_NORM_EPS):
    """Normalise the last axis to zero mean / unit variance, then gain·x̂ + bias"""
    width = x.shape[-1]
    if gain.shape != (width,) or bias.shape != (width,):
        raise DimensionError('layer_norm', x.shape, gain.shape, bias.shape)

    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std

    def backward(g):
        dxhat = g * gain.data
        dx = inv_std * (dxhat
                        - dxhat.mean(axis=-1, keepdims=True)
                        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(g.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return _make('layer_norm', xhat * gain.data + bias.data, (x, gain, bias), backward)


# -- shape manipulation ------------------------------------------------

def reshape(x, shape):
    shape = tuple(shape)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise DimensionError('reshape', x.shape, shape) from None

    def backward(g):
        return (g.reshape(x.shape),)

    return _make('reshape', data, (x,), backward)


def transpose(x, axes=None):
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f'transpose (axes {axes})', x.shape)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return _make('transpose', np.transpose(x.data, axes), (x,), backward)


def swap_last(x):
    """Swap the two trailing axes"""
    axes = list(range(x.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(x, axes)


def concat(tensors, axis=-1):
    tensors = list(tensors)
    if not tensors:
        raise DimensionError('concat (no operands)')
    ref = tensors[0]
    ax = axis % ref.ndim
    for t in tensors[1:]:
        if t.ndim != ref.ndim or any(
                t.shape[i] != ref.shape[i] for i in range(ref.ndim) if i != ax):
            raise DimensionError('concat', *(t.shape for t in tensors))
    bounds = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=ax))

    return _make('concat', np.concatenate([t.data for t in tensors], axis=ax),
                 tuple(tensors), backward)


def take(x, indices, axis=0):
    """Gather along `axis` (used for token permutations)"""
    indices = np.asarray(indices, dtype=np.intp)

    def backward(g):
        grad = np.zeros_like(x.data)
        moved = np.moveaxis(grad, axis, 0)
        np.add.at(moved, indices, np.moveaxis(g, axis, 0))
        return (grad,)

    return _make('take', np.take(x.data, indices, axis=axis), (x,), backward)
