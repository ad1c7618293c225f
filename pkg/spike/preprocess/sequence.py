"""Fixed-size resampling, per-sequence centring and training augmentation"""

import numpy as np

from spike.errors import EmptySceneError
from spike.models import JOINT_NAMES, PointCloud, PointCloudSequence, SkeletonFrame, mirror_permutation

MAX_ROTATION_DEG = 90.0
MIRROR_PROBABILITY = 0.5


def resample(pc, n, seed):
    """Exactly n points: without replacement when possible, with replacement otherwise"""
    if pc.is_empty:
        raise EmptySceneError('resample: empty point cloud')
    rng = np.random.default_rng(seed)
    index = rng.choice(len(pc), size=n, replace=len(pc) < n)
    return PointCloud(pc.points[index])


def center_sequence(seq):
    """Subtract the mean over all points of all frames; return it for un-centring"""
    if seq.num_frames == 0 or seq.num_points == 0:
        raise EmptySceneError('center_sequence: empty sequence')
    centroid = seq.frames.reshape(-1, 3).mean(axis=0)
    return PointCloudSequence(seq.frames - centroid, seq.timestamps.copy()), centroid


def rotation_y(theta):
    """Right-handed rotation about +y by `theta` radians"""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s],
                     [0.0, 1.0, 0.0],
                     [-s, 0.0, c]])


def apply_augmentation(seq, skeleton, theta, mirror, names=JOINT_NAMES):
    """Mirror x (swapping left/right joints) when asked, then rotate about y"""
    frames = seq.frames.copy()
    joints = skeleton.joints.copy()
    valid = skeleton.valid.copy()

    if mirror:
        frames[..., 0] = -frames[..., 0]
        joints[:, 0] = -joints[:, 0]
        perm = mirror_permutation(names)
        joints, valid = joints[perm], valid[perm]

    rot = rotation_y(theta)
    frames = frames @ rot.T
    joints = joints @ rot.T
    return PointCloudSequence(frames, seq.timestamps.copy()), SkeletonFrame(joints, valid)


def augment(seq, skeleton, seed, names=JOINT_NAMES,
            max_rotation_deg=MAX_ROTATION_DEG, mirror_probability=MIRROR_PROBABILITY):
    """One random y rotation in ±max_rotation_deg plus an optional x mirror per sequence"""
    rng = np.random.default_rng(seed)
    theta = np.deg2rad(rng.uniform(-max_rotation_deg, max_rotation_deg))
    mirror = rng.random() < mirror_probability
    return apply_augmentation(seq, skeleton, theta, mirror, names)
