"""Temporal windows over recordings"""

import numpy as np

from spike.errors import ConfigError
from spike.models import PointCloud, PointCloudSequence
from spike.models.hyperparams import WINDOW_MODES
from spike.preprocess import resample


def window_positions(t, length, num_frames, mode):
    """
    Frame positions feeding the prediction at frame t.

    past:         t−T+1 .. t
    past-future:  t−⌊T/2⌋ .. t+⌈T/2⌉−1
    Positions outside the recording are clamped (edge frames replicated).
    """
    if length < 1:
        raise ConfigError('seq_len', f'must be at least 1, got {length}')
    if mode not in WINDOW_MODES:
        raise ConfigError('window_mode', f'unknown mode {mode!r}')
    if mode == 'past':
        first = t - length + 1
    else:
        first = t - length // 2
    return np.clip(np.arange(first, first + length), 0, num_frames - 1)


def window(dataset, index, length, mode='past', num_points=None, seed=0):
    """
    (PointCloudSequence, target SkeletonFrame) for global frame `index`.

    With `num_points` set, every frame is first resampled to that size
    (frames that already match are used as they are).
    """
    r, t = dataset.locate(index)
    rec = dataset.recordings[r]
    positions = window_positions(t, length, len(rec), mode)
    frames = []
    for p in positions:
        points = rec.frames[p].points
        if num_points is not None and len(points) != num_points:
            points = resample(PointCloud(points), num_points, [seed, index, int(p)]).points
        frames.append(points)
    return PointCloudSequence(frames), rec.frames[t].skeleton
