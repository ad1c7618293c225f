"""SGD with momentum over ModelParams"""

import logging
from collections import OrderedDict

import numpy as np

from spike.errors import ConfigError, NumericError

logger = logging.getLogger(__name__)


class SGD:
    """
    v ← momentum·v + g, then p ← p − lr·v for every parameter.

    Gradients are checked before anything is updated, so a non-finite
    gradient aborts the step with the parameters untouched.
    """

    def __init__(self, params, lr, momentum=0.0, velocity=None):
        if lr < 0:
            raise ConfigError('learning_rate', f'must be non-negative, got {lr}')
        if not 0.0 <= momentum < 1.0:
            raise ConfigError('momentum', f'must lie in [0, 1), got {momentum}')
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self.velocity = OrderedDict(
            (name, np.zeros_like(t.data)) for name, t in params.items())
        if velocity is not None:
            self.load_velocity(velocity)

    def __repr__(self):
        return f'<SGD lr={self.lr} momentum={self.momentum}>'

    def load_velocity(self, velocity):
        for name, values in velocity.items():
            if name not in self.velocity:
                raise ConfigError(name, 'velocity for unknown parameter')
            self.velocity[name] = np.array(values, dtype=self.params[name].dtype)

    def zero_grad(self):
        self.params.zero_grad()

    def step(self):
        for name, tensor in self.params.items():
            if tensor.grad is not None and not np.all(np.isfinite(tensor.grad)):
                bad = int(np.size(tensor.grad) - np.isfinite(tensor.grad).sum())
                raise NumericError(name, f'{bad} non-finite gradient values')

        for name, tensor in self.params.items():
            v = self.velocity[name]
            if tensor.grad is not None:
                v = self.momentum * v + tensor.grad
            else:
                v = self.momentum * v
            self.velocity[name] = v.astype(tensor.dtype, copy=False)
            tensor.data -= self.lr * self.velocity[name]
        self.zero_grad()
