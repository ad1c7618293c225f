"""
The SPiKE network: tokenize → volume convolution → positional embedding →
m transformer blocks → global max pool → regression MLP.
"""

import logging

import numpy as np

from spike.autodiff import no_grad
from spike.errors import DataError, DimensionError
from spike.models import PoseOutput, TokenBatch
from spike.network.layers import (
    point_spatial_conv, point_st_conv_variant, positional_embed, regression_head,
    transformer_block,
)
from spike.network.params import ModelParams
from spike.tokenizer import tokenize_for

logger = logging.getLogger(__name__)


def _stack_tokens(tokens):
    """One TokenBatch or a list of them → (references, displacements) arrays"""
    if isinstance(tokens, TokenBatch):
        canon = tokens.canonical()
        return canon.references, canon.displacements
    canon = [t.canonical() for t in tokens]
    sizes = {len(t) for t in canon}
    if len(sizes) != 1:
        raise DataError(f'token batches differ in length: {sorted(sizes)}')
    return (np.stack([t.references for t in canon]),
            np.stack([t.displacements for t in canon]))


def forward_tokens(tokens, hp, params):
    """
    Network output for tokenized input, as a Tensor on the active tape.

    A single TokenBatch gives an M×3 tensor, a list of them B×M×3. Tokens
    are put in canonical order first, which makes the output independent of
    the row order of `tokens`.
    """
    references, displacements = _stack_tokens(tokens)
    if references.shape[-2] != hp.num_tokens:
        raise DimensionError('forward (token count)', references.shape, (hp.num_tokens, 4))

    if hp.conv_mode == 'st':
        features = point_st_conv_variant(displacements, params)
    else:
        features = point_spatial_conv(displacements, params)

    x = positional_embed(features, references, params)
    for b in range(hp.blocks):
        x = transformer_block(x, params.block(b), hp.heads)
    return regression_head(x, params, hp.num_joints)


def forward(seq, hp, params, seed):
    """Inference on one sequence: M×3 joints in the centred sequence frame"""
    if seq.num_frames != hp.seq_len or seq.num_points != hp.num_points:
        raise DataError(f'sequence is {seq.num_frames}×{seq.num_points}, model expects '
                        f'{hp.seq_len}×{hp.num_points}')
    tokens = tokenize_for(seq, hp, seed)
    with no_grad():
        out = forward_tokens(tokens, hp, params)
    return PoseOutput(out.data)


class SpikeModel:
    """HyperParams plus parameters, with the inference entry points"""

    def __init__(self, hp, params=None, seed=0, dtype='float64'):
        self.hp = hp
        self.params = params if params is not None else ModelParams.initialize(hp, seed, dtype)
        logger.debug('SpikeModel %s with %d parameters', hp.conv_mode, self.params.num_values)

    def __repr__(self):
        return f'<SpikeModel T={self.hp.seq_len} C={self.hp.channels} m={self.hp.blocks}>'

    def __call__(self, tokens):
        return forward_tokens(tokens, self.hp, self.params)

    def tokenize(self, seq, seed):
        return tokenize_for(seq, self.hp, seed)

    def forward(self, seq, seed=0):
        return forward(seq, self.hp, self.params, seed)

    def predict_tokens(self, tokens):
        """Array output without recording on the tape"""
        with no_grad():
            out = forward_tokens(tokens, self.hp, self.params)
        return np.array(out.data, dtype=np.float64)

    @property
    def dtype(self):
        return self.params.dtype
