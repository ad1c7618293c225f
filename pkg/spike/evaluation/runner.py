"""Batch inference over dataset frames"""

import logging
from dataclasses import dataclass

import numpy as np

from spike.autodiff import no_grad
from spike.errors import DataError
from spike.models import PointCloud, PointCloudSequence
from spike.network import forward, forward_tokens
from spike.preprocess import center_sequence, resample
from spike.evaluation.metrics import DEFAULT_THRESHOLD_M, map_at_threshold
from spike.training.samples import prepare_sample

logger = logging.getLogger(__name__)


@dataclass
class Predictions:
    """Aligned predictions and targets (centred frame) with their centroids"""

    indices: list
    joints: list
    targets: list
    centroids: list

    def __len__(self):
        return len(self.indices)


def final_frame_indices(dataset):
    """Global index of the last frame of every recording"""
    indices, offset = [], 0
    for rec in dataset.recordings:
        offset += len(rec)
        indices.append(offset - 1)
    return indices


def predict_frames(dataset, indices, hp, params, seed=0, batch_size=16):
    indices = [int(i) for i in indices]
    joints, targets, centroids = [], [], []
    for start in range(0, len(indices), batch_size):
        samples = [prepare_sample(dataset, i, hp, seed) for i in indices[start:start + batch_size]]
        with no_grad():
            out = forward_tokens([s.tokens for s in samples], hp, params).data
        for s, pred in zip(samples, np.asarray(out, dtype=np.float64)):
            joints.append(pred)
            targets.append(s.target)
            centroids.append(s.centroid)
    return Predictions(indices, joints, targets, centroids)


def evaluate(dataset, hp, params, seed=0, threshold=DEFAULT_THRESHOLD_M, indices=None,
             batch_size=16):
    """
    EvalReport over `indices` (default: every frame with a valid joint).

    Frames whose joints are all invalid are never scored, even when listed.
    """
    if indices is None:
        indices = dataset.eval_indices()
    else:
        scorable = set(dataset.eval_indices())
        indices = [i for i in indices if i in scorable]
    if not indices:
        raise DataError('no labelled frames to evaluate')

    predictions = predict_frames(dataset, indices, hp, params, seed, batch_size)
    report = map_at_threshold(predictions.joints, predictions.targets, threshold)
    logger.info('Evaluated %d frames: mean_ap=%.2f', len(predictions), report.mean_ap)
    return report, predictions


def predict_clouds(clouds, hp, params, seed=0):
    """
    Pose for the last (past) or middle (past-future) frame of `clouds`.

    Each cloud is resampled to N points, the sequence is centred and the
    prediction is moved back to sensor coordinates. Returns
    (sensor-frame PoseOutput, centred PoseOutput, centroid).
    """
    if len(clouds) != hp.seq_len:
        raise DataError(f'expected {hp.seq_len} frames, got {len(clouds)}')
    frames = []
    for t, cloud in enumerate(clouds):
        points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud)
        if len(points) != hp.num_points:
            points = resample(PointCloud(points), hp.num_points, [int(seed), t]).points
        frames.append(points)
    centred, centroid = center_sequence(PointCloudSequence(frames))
    pose = forward(centred, hp, params, seed)
    return pose.uncentered(centroid), pose, centroid
