"""Learnable parameters of the network, in declaration order"""

from collections import OrderedDict

import numpy as np

from spike.autodiff import Tensor
from spike.errors import ConfigError, DimensionError


def expected_shapes(hp):
    """(name, shape) for every parameter, in declaration order"""
    c, cp, ck, cv = hp.channels, hp.c_prime, hp.c_k, hp.c_v
    shapes = []
    if hp.conv_mode == 'st':
        shapes.append(('conv.W_st', (cp, 4)))
    else:
        shapes.append(('conv.W_s', (cp, 3)))
    shapes += [
        ('conv.mlp0.weight', (cp, cp)),
        ('conv.mlp0.bias', (cp,)),
        ('conv.mlp1.weight', (c, cp)),
        ('conv.mlp1.bias', (c,)),
        ('embed.W_i', (c, 4)),
    ]
    for b in range(hp.blocks):
        p = f'blocks.{b}.'
        shapes += [
            (p + 'ln1.gain', (c,)),
            (p + 'ln1.bias', (c,)),
            (p + 'W_Q', (ck, c)),
            (p + 'W_K', (ck, c)),
            (p + 'W_V', (cv, c)),
            (p + 'W_o', (c, cv)),
            (p + 'ln2.gain', (c,)),
            (p + 'ln2.bias', (c,)),
            (p + 'ff0.weight', (2 * c, c)),
            (p + 'ff0.bias', (2 * c,)),
            (p + 'ff1.weight', (c, 2 * c)),
            (p + 'ff1.bias', (c,)),
        ]
    shapes += [
        ('head.fc0.weight', (c // 2, c)),
        ('head.fc0.bias', (c // 2,)),
        ('head.fc1.weight', (3 * hp.num_joints, c // 2)),
        ('head.fc1.bias', (3 * hp.num_joints,)),
    ]
    return shapes


def _fan_in(name, shape, hp):
    if name.endswith('.bias') and '.ln' not in name:
        # Bias shares the fan-in of its weight matrix
        return {
            'conv.mlp0.bias': hp.c_prime,
            'conv.mlp1.bias': hp.c_prime,
            'head.fc0.bias': hp.channels,
            'head.fc1.bias': hp.channels // 2,
        }.get(name, hp.channels if 'ff0' in name else 2 * hp.channels)
    return shape[-1]


class ModelParams:
    """Ordered name → Tensor mapping with shapes fixed by HyperParams"""

    def __init__(self, hp, tensors):
        self.hp = hp
        self._tensors = OrderedDict()
        given = dict(tensors)
        for name, shape in expected_shapes(hp):
            if name not in given:
                raise ConfigError(name, 'missing parameter')
            tensor = given.pop(name)
            if not isinstance(tensor, Tensor):
                tensor = Tensor(tensor)
            if tensor.shape != shape:
                raise DimensionError(f'parameter {name}', tensor.shape, shape)
            tensor.name = name
            tensor.requires_grad = True
            self._tensors[name] = tensor
        if given:
            raise ConfigError(sorted(given)[0], 'unexpected parameter')

    @classmethod
    def initialize(cls, hp, seed=0, dtype='float64'):
        """uniform(−1/√fan_in, 1/√fan_in); layer norms start at gain 1, bias 0"""
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape in expected_shapes(hp):
            if name.endswith('.gain'):
                values = np.ones(shape)
            elif '.ln' in name:
                values = np.zeros(shape)
            else:
                bound = 1.0 / np.sqrt(_fan_in(name, shape, hp))
                values = rng.uniform(-bound, bound, size=shape)
            tensors[name] = Tensor(values, dtype=dtype)
        return cls(hp, tensors)

    def __getitem__(self, name):
        return self._tensors[name]

    def __contains__(self, name):
        return name in self._tensors

    def __iter__(self):
        return iter(self._tensors.values())

    def __len__(self):
        return len(self._tensors)

    def __repr__(self):
        return f'<ModelParams tensors={len(self)} values={self.num_values}>'

    @property
    def names(self):
        return list(self._tensors)

    @property
    def dtype(self):
        return next(iter(self._tensors.values())).dtype

    @property
    def num_values(self):
        return int(sum(t.size for t in self._tensors.values()))

    def items(self):
        return self._tensors.items()

    def block(self, b):
        """Tensors of transformer block `b`, keyed without the prefix"""
        prefix = f'blocks.{b}.'
        return {name[len(prefix):]: t for name, t in self._tensors.items()
                if name.startswith(prefix)}

    def zero_grad(self):
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def astype(self, dtype):
        return ModelParams(self.hp, {name: Tensor(t.data, dtype=dtype)
                                     for name, t in self._tensors.items()})

    def copy(self):
        return self.astype(self.dtype)

    def state(self):
        """name → array copy"""
        return OrderedDict((name, t.data.copy()) for name, t in self._tensors.items())
