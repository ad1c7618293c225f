"""Depth frames → human-only, centred, fixed-size point clouds"""

from spike.preprocess.depth import (
    ITOP_INTRINSICS, depth_to_points, load_depth_image, threshold_background,
)
from spike.preprocess.segmentation import (
    NOISE, Clustering, HumanSegmenter, dbscan, keeps_cluster, remove_floor, select_human,
)
from spike.preprocess.sequence import (
    apply_augmentation, augment, center_sequence, resample, rotation_y,
)

__all__ = [
    'ITOP_INTRINSICS', 'depth_to_points', 'load_depth_image', 'threshold_background',
    'NOISE', 'Clustering', 'HumanSegmenter', 'dbscan', 'keeps_cluster', 'remove_floor',
    'select_human', 'apply_augmentation', 'augment', 'center_sequence', 'resample',
    'rotation_y',
]
