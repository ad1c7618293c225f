"""
Network layers over batched token tensors.

Shapes carry arbitrary leading batch dimensions: a single sequence is
(tokens, ...), a training batch is (B, tokens, ...).
"""

import numpy as np

from spike.autodiff import (
    Tensor, add, layer_norm, linear, matmul, max_reduce, relu, reshape, scale,
    softmax_rows, swap_last, take, transpose,
)
from spike.errors import DimensionError
from spike.models import LocalVolume


def _input(values, params):
    if isinstance(values, LocalVolume):
        values = values.displacements
    if isinstance(values, Tensor):
        return values
    return Tensor(values, dtype=params.dtype)


def _conv_mlp(h, params):
    h = relu(linear(h, params['conv.mlp0.weight'], params['conv.mlp0.bias']))
    return linear(h, params['conv.mlp1.weight'], params['conv.mlp1.bias'])


def point_spatial_conv(displacements, params):
    """
    F = max over the N_s displacements δ of MLP(W_s · δ).

    `displacements` is (..., N_s, 3) (or a LocalVolume); returns (..., C).
    """
    x = _input(displacements, params)
    if x.ndim < 2 or x.shape[-1] != 3:
        raise DimensionError('point_spatial_conv', x.shape, ('...', 'N_s', 3))
    lead, samples = x.shape[:-2], x.shape[-2]

    h = matmul(reshape(x, (-1, 3)), transpose(params['conv.W_s']))
    h = _conv_mlp(h, params)
    h = reshape(h, lead + (samples, h.shape[-1]))
    return max_reduce(h, axis=-2)


def point_st_conv_variant(displacements, params):
    """
    Spatio-temporal volume features for the ablation path.

    `displacements` is (..., k_t·N_s, 4) holding (δx, δy, δz, δt). The C'×4
    map is applied as its spatial 3 columns plus the δt column, so a zero δt
    leaves the spatial product untouched.
    """
    x = _input(displacements, params)
    if x.ndim < 2 or x.shape[-1] != 4:
        raise DimensionError('point_st_conv_variant', x.shape, ('...', 'k_t*N_s', 4))
    lead, samples = x.shape[:-2], x.shape[-2]

    weight = params['conv.W_st']
    flat = reshape(x, (-1, 4))
    spatial = matmul(take(flat, [0, 1, 2], axis=1), transpose(take(weight, [0, 1, 2], axis=1)))
    temporal = matmul(take(flat, [3], axis=1), transpose(take(weight, [3], axis=1)))
    h = _conv_mlp(add(spatial, temporal), params)
    h = reshape(h, lead + (samples, h.shape[-1]))
    return max_reduce(h, axis=-2)


def positional_embed(features, references, params):
    """I = F + P'·W_iᵀ with P' = (x, y, z, t) per token; no bias"""
    refs = _input(references, params)
    if refs.shape[:-1] != features.shape[:-1] or refs.shape[-1] != 4:
        raise DimensionError('positional_embed', features.shape, refs.shape)
    return add(features, matmul(refs, transpose(params['embed.W_i'])))


def _split_heads(x, heads):
    lead, n, width = x.shape[:-2], x.shape[-2], x.shape[-1]
    k = len(lead)
    x = reshape(x, lead + (n, heads, width // heads))
    return transpose(x, tuple(range(k)) + (k + 1, k, k + 2))


def _merge_heads(x):
    lead, heads, n, width = x.shape[:-3], x.shape[-3], x.shape[-2], x.shape[-1]
    k = len(lead)
    x = transpose(x, tuple(range(k)) + (k + 1, k, k + 2))
    return reshape(x, lead + (n, heads * width))


def attention_heads(x, block, heads):
    """Concatenated per-head softmax(QKᵀ/√d_k)·V, before the W_o projection"""
    if x.shape[-2] < 1:
        raise DimensionError('multi_head_attention (no tokens)', x.shape)
    q = _split_heads(linear(x, block['W_Q']), heads)
    k = _split_heads(linear(x, block['W_K']), heads)
    v = _split_heads(linear(x, block['W_V']), heads)

    d_k = q.shape[-1]
    scores = scale(matmul(q, swap_last(k)), 1.0 / np.sqrt(d_k))
    return _merge_heads(matmul(softmax_rows(scores), v))


def multi_head_attention(x, block, heads):
    """h-head self-attention over the token axis, projected by W_o"""
    return linear(attention_heads(x, block, heads), block['W_o'])


def feed_forward(x, block):
    h = relu(linear(x, block['ff0.weight'], block['ff0.bias']))
    return linear(h, block['ff1.weight'], block['ff1.bias'])


def transformer_block(x, block, heads):
    """Pre-norm residual block: x + MHA(LN(x)), then x + FF(LN(x))"""
    x = add(x, multi_head_attention(layer_norm(x, block['ln1.gain'], block['ln1.bias']),
                                    block, heads))
    return add(x, feed_forward(layer_norm(x, block['ln2.gain'], block['ln2.bias']), block))


def regression_head(x, params, num_joints):
    """Global max over tokens, then MLP C → C/2 → 3M reshaped to M×3"""
    pooled = max_reduce(x, axis=-2)
    lead, width = pooled.shape[:-1], pooled.shape[-1]
    # A single sequence pools to a vector; the head runs on a one-row matrix
    h = reshape(pooled, (-1, width))
    h = relu(linear(h, params['head.fc0.weight'], params['head.fc0.bias']))
    out = linear(h, params['head.fc1.weight'], params['head.fc1.bias'])
    return reshape(out, lead + (num_joints, 3))
