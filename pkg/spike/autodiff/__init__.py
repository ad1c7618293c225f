"""Reverse-mode automatic differentiation over NumPy arrays"""

from spike.autodiff.tensor import Tensor, as_tensor
from spike.autodiff.tape import (
    Tape, backward, clear_tape_context, get_current_tape, is_grad_enabled, no_grad,
)
from spike.autodiff.ops import (
    absolute, add, concat, layer_norm, linear, matmul, max_reduce, mean, mul,
    relu, reshape, scale, softmax_rows, sub, sum_, swap_last, take, transpose,
)
from spike.autodiff.gradcheck import finite_diff_grad, relative_error

__all__ = [
    'Tensor', 'as_tensor', 'Tape', 'backward', 'clear_tape_context',
    'get_current_tape', 'is_grad_enabled', 'no_grad',
    'absolute', 'add', 'concat', 'layer_norm', 'linear', 'matmul', 'max_reduce',
    'mean', 'mul', 'relu', 'reshape', 'scale', 'softmax_rows', 'sub', 'sum_',
    'swap_last', 'take', 'transpose',
    'finite_diff_grad', 'relative_error',
]
