"""Masked L1 loss over valid joints"""

import numpy as np

from spike.autodiff import Tensor, absolute, mul, scale, sub, sum_
from spike.errors import DimensionError


def joint_weights(valid):
    """
    Per-coordinate weights 1 / (3·n_valid) on valid joints, 0 elsewhere.

    `valid` is M or B×M; a sample with no valid joint gets all-zero weights.
    """
    valid = np.asarray(valid, dtype=bool)
    counts = valid.sum(axis=-1, keepdims=True).astype(np.float64)
    per_joint = np.divide(valid, 3.0 * counts, out=np.zeros(valid.shape), where=counts > 0)
    return np.repeat(per_joint[..., None], 3, axis=-1)


def l1_loss_masked(pred, target, valid):
    """
    Mean absolute coordinate error over valid joints, averaged over the batch.

    `pred` is an M×3 or B×M×3 Tensor; `target` matches it (array or Tensor)
    and `valid` is M or B×M. All-invalid samples add 0 and pass no gradient.
    """
    if not isinstance(target, Tensor):
        target = Tensor(target, dtype=pred.dtype)
    if pred.shape != target.shape or pred.shape[-1] != 3:
        raise DimensionError('l1_loss_masked', pred.shape, target.shape)
    weights = joint_weights(valid)
    if weights.shape != pred.shape:
        raise DimensionError('l1_loss_masked (valid flags)', pred.shape, np.shape(valid))

    batch = pred.shape[0] if pred.ndim == 3 else 1
    per_coord = mul(absolute(sub(pred, target)), Tensor(weights, dtype=pred.dtype))
    return scale(sum_(per_coord), 1.0 / batch)
