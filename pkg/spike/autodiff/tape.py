"""
Gradient tape: an ordered record of primitive operations.

Every differentiable op appends one `Node` to the active tape while gradient
recording is enabled. `Tape.backward` replays the record from the loss node
back to the start, so the reverse sweep visits nodes in exact reverse order
of the forward sweep.

Tape context is thread-local: each thread pushes its own tapes and owns an
implicit default tape, so independent tapes can run concurrently while one
tape is never shared between threads.
"""

import threading
from contextlib import contextmanager

import numpy as np

from spike.errors import DimensionError, SpikeError

# Thread-local storage for tape context
_local = threading.local()


class Node:
    """One recorded primitive: inputs, output and the vector-Jacobian product"""

    __slots__ = ('op', 'inputs', 'output', 'backward_fn')

    def __init__(self, op, inputs, output, backward_fn):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn

    def __repr__(self):
        return f'<Node {self.op} -> {self.output.shape}>'


class Tape:
    """Single-owner operation record used for the reverse sweep"""

    def __init__(self):
        self.nodes = []

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f'<Tape nodes={len(self.nodes)}>'

    def __enter__(self):
        _stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _stack().pop()
        return False

    def record(self, op, inputs, output, backward_fn):
        """Append a node and link the output tensor back to it"""
        self.nodes.append(Node(op, inputs, output, backward_fn))
        output._node = (self, len(self.nodes) - 1)

    def clear(self):
        """Drop every node and the references it holds"""
        for node in self.nodes:
            node.output._node = None
        self.nodes = []

    def backward(self, loss):
        """Accumulate d(loss)/d(x) into `x.grad` for every reachable tensor"""
        if loss.data.size != 1:
            raise DimensionError('backward (scalar loss required)', loss.shape)

        if loss._node is None:
            if not loss.requires_grad:
                raise SpikeError('backward: loss is not on the tape')
            loss._accumulate(np.ones_like(loss.data))
            return

        tape, index = loss._node
        if tape is not self:
            raise SpikeError('backward: loss was recorded on a different tape')

        adjoints = {id(loss): np.ones_like(loss.data)}
        leaves = {}

        for node in reversed(self.nodes[:index + 1]):
            grad_out = adjoints.pop(id(node.output), None)
            if grad_out is None:
                continue
            # All consumers of this output come later on the tape, so its
            # adjoint is complete here.
            node.output._accumulate(grad_out)

            grads = node.backward_fn(grad_out)
            for tensor, grad in zip(node.inputs, grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + grad
                else:
                    adjoints[key] = grad
                if tensor._node is None:
                    leaves[key] = tensor

        for key, tensor in leaves.items():
            tensor._accumulate(adjoints[key])


def _stack():
    if not hasattr(_local, 'stack'):
        _local.stack = []
    return _local.stack


def get_current_tape():
    """Innermost active tape, or this thread's default tape"""
    stack = _stack()
    if stack:
        return stack[-1]
    if not hasattr(_local, 'default_tape'):
        _local.default_tape = Tape()
    return _local.default_tape


def clear_tape_context():
    """Clear this thread's default tape"""
    if hasattr(_local, 'default_tape'):
        _local.default_tape.clear()


def is_grad_enabled():
    return getattr(_local, 'grad_enabled', True)


@contextmanager
def no_grad():
    """Disable recording inside the block (inference, finite differences)"""
    previous = is_grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


def backward(loss):
    """Run the reverse sweep on the tape that recorded `loss`"""
    if loss._node is not None:
        tape, _ = loss._node
    else:
        tape = get_current_tape()
    tape.backward(loss)
