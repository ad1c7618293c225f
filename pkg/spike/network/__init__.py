"""Point spatial convolution + transformer keypoint regressor"""

from spike.network.params import ModelParams, expected_shapes
from spike.network.layers import (
    attention_heads, feed_forward, multi_head_attention, point_spatial_conv,
    point_st_conv_variant, positional_embed, regression_head, transformer_block,
)
from spike.network.model import SpikeModel, forward, forward_tokens
from spike.network.checkpoint import FORMAT_VERSION, MAGIC, load_checkpoint, save_checkpoint

__all__ = [
    'ModelParams', 'expected_shapes',
    'attention_heads', 'feed_forward', 'multi_head_attention', 'point_spatial_conv',
    'point_st_conv_variant', 'positional_embed', 'regression_head', 'transformer_block',
    'SpikeModel', 'forward', 'forward_tokens',
    'FORMAT_VERSION', 'MAGIC', 'load_checkpoint', 'save_checkpoint',
]
