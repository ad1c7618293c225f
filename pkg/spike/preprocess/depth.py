"""Depth map back-projection and background removal"""

import logging

import numpy as np
from PIL import Image

from spike.errors import DataError
from spike.models import DepthFrame, PointCloud

logger = logging.getLogger(__name__)

# ITOP front-view intrinsics (320×240 Asus Xtion)
ITOP_INTRINSICS = {'fx': 285.71, 'fy': 285.71, 'cx': 160.0, 'cy': 120.0}


def depth_to_points(frame):
    """Pinhole back-projection of every valid (non-zero) pixel"""
    v, u = np.nonzero(frame.depth > 0)
    d = frame.depth[v, u]
    x = (u - frame.cx) * d / frame.fx
    y = (v - frame.cy) * d / frame.fy
    return PointCloud(np.stack([x, y, d], axis=1))


def threshold_background(pc, cfg):
    """Keep points closer than the depth threshold"""
    keep = pc.points[:, 2] < cfg.depth_threshold_m
    return PointCloud(pc.points[keep])


def load_depth_image(path, scale=0.001, intrinsics=None):
    """Read a 16-bit depth PNG (millimetres by default) into a DepthFrame"""
    intrinsics = intrinsics or ITOP_INTRINSICS
    try:
        with Image.open(path) as img:
            raw = np.asarray(img, dtype=np.float64)
    except (OSError, ValueError) as e:
        raise DataError(f'cannot read depth image: {e}', path=path) from e

    if raw.ndim != 2:
        raise DataError(f'expected a single-channel depth image, got shape {raw.shape}', path=path)

    logger.debug('Loaded depth image %s (%dx%d)', path, raw.shape[1], raw.shape[0])
    return DepthFrame(raw * scale, **intrinsics)
