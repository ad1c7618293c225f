"""
Dense tensor with optional gradient-tape participation.

Tensors wrap a NumPy array. They are treated as immutable once produced by a
forward op; only `grad` is updated (accumulated) by the reverse sweep, and
parameters are updated in place by the optimizer under exclusive access.
"""

import numpy as np

from spike.errors import DimensionError


class Tensor:
    """
    Row-major real array that may take part in reverse-mode differentiation.

    Parameters
    ----------
    data : array_like
        Values. Integer and boolean input is converted to float64.
    requires_grad : bool, optional
        Whether the reverse sweep should produce a gradient for this tensor.
    dtype : numpy dtype, optional
        Storage precision; float64 for tests, float32 allowed for training.
    name : str, optional
        Label used in diagnostics (parameter names, NaN reports).

    Notes
    -----
    - ``grad`` is None until a backward pass reaches the tensor, then an
      array of identical shape that keeps accumulating across passes until
      `zero_grad` is called.
    """

    __slots__ = ('data', 'requires_grad', 'grad', 'name', '_node')

    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, dtype=None, name=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            arr = np.asarray(data)
            dtype = arr.dtype if np.issubdtype(arr.dtype, np.floating) else np.float64
        self.data = np.array(data, dtype=dtype)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.name = name
        self._node = None

    # -- introspection -------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self):
        return self._node is None

    def numpy(self):
        """Return a copy of the values"""
        return self.data.copy()

    def item(self):
        if self.data.size != 1:
            raise DimensionError('item (single element required)', self.shape)
        return float(self.data.reshape(-1)[0])

    def __len__(self):
        return self.data.shape[0]

    def __repr__(self):
        label = f' {self.name}' if self.name else ''
        flag = ', requires_grad' if self.requires_grad else ''
        return f'<Tensor{label} shape={self.shape} dtype={self.dtype}{flag}>'

    # -- gradients -----------------------------------------------------

    def _accumulate(self, grad):
        grad = np.asarray(grad, dtype=self.data.dtype)
        if grad.shape != self.data.shape:
            grad = np.broadcast_to(grad, self.data.shape)
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype)
        else:
            self.grad = self.grad + grad

    def zero_grad(self):
        self.grad = None

    def backward(self):
        from spike.autodiff.tape import backward
        backward(self)

    def detach(self):
        return Tensor(self.data, dtype=self.data.dtype, name=self.name)

    # -- operators -----------------------------------------------------

    def __add__(self, other):
        from spike.autodiff import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from spike.autodiff import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from spike.autodiff import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from spike.autodiff import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from spike.autodiff import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from spike.autodiff import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from spike.autodiff import ops
        if isinstance(other, Tensor):
            raise TypeError('division by a tensor is not supported')
        return ops.scale(self, 1.0 / other)

    def __neg__(self):
        from spike.autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from spike.autodiff import ops
        return ops.matmul(self, other)

    def reshape(self, *shape):
        from spike.autodiff import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes):
        from spike.autodiff import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)

    @property
    def T(self):
        return self.transpose()


def as_tensor(value, dtype=None):
    """Wrap constants; tensors pass through unchanged"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)
