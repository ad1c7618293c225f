"""Central finite differences: the reference oracle for every backward rule"""

import numpy as np

from spike.autodiff.tape import no_grad
from spike.autodiff.tensor import Tensor


def _scalar(value):
    if isinstance(value, Tensor):
        return value.item()
    return float(value)


def finite_diff_grad(f, params, step=1e-5):
    """
    Estimate d f / d p for every tensor in `params`.

    `f` takes no arguments and reads the current parameter values; each
    coordinate is perturbed in place by ±step and restored afterwards, so `f`
    must be deterministic (fix any seeds it uses).

    Returns a list of arrays shaped like each parameter.
    """
    estimates = []
    with no_grad():
        for param in params:
            flat = param.data.reshape(-1)
            grad = np.zeros(flat.shape, dtype=np.float64)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                upper = _scalar(f())
                flat[i] = original - step
                lower = _scalar(f())
                flat[i] = original
                grad[i] = (upper - lower) / (2.0 * step)
            estimates.append(grad.reshape(param.shape))
    return estimates


def relative_error(analytic, numeric, floor=1e-8):
    """Max-norm relative error ‖a − n‖∞ / max(‖a‖∞, ‖n‖∞, floor)"""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)
