"""
Local-volume tokenization of point cloud sequences.

Each frame is split into N_v volumes around farthest-point-sampled reference
points; every volume holds N_s neighbours within radius r, stored as
displacements from its reference. Grouping never crosses frames on the
spatial path. The spatio-temporal variant gathers the same ball from the
k_t frames around t and appends the frame offset δt to each displacement.
"""

import numpy as np

from spike.errors import ConfigError, EmptySceneError
from spike.models import LocalVolume, PointCloud, TokenBatch


def _points(pc):
    if isinstance(pc, PointCloud):
        return pc.points
    return np.asarray(pc, dtype=np.float64).reshape(-1, 3)


def farthest_point_sampling(pc, k, seed=None, start=None):
    """
    Greedy farthest point sampling.

    The first index is drawn uniformly under `seed` unless `start` is given;
    every later index maximises the squared distance to the chosen set, ties
    going to the lowest index. When k exceeds the cloud size the selection
    repeats cyclically once every point has been taken.
    """
    points = _points(pc)
    n = len(points)
    if n == 0:
        raise EmptySceneError('farthest_point_sampling: empty point cloud')
    if k < 1:
        raise ConfigError('k', f'must be at least 1, got {k}')

    if start is None:
        start = int(np.random.default_rng(seed).integers(n))

    count = min(k, n)
    chosen = np.empty(count, dtype=np.intp)
    chosen[0] = start
    taken = np.zeros(n, dtype=bool)
    taken[start] = True
    dist = np.sum((points - points[start]) ** 2, axis=1)

    for i in range(1, count):
        idx = int(np.argmax(np.where(taken, -1.0, dist)))
        chosen[i] = idx
        taken[idx] = True
        dist = np.minimum(dist, np.sum((points - points[idx]) ** 2, axis=1))

    if k > n:
        chosen = chosen[np.arange(k) % n]
    return chosen


def ball_group(pc, center, r, n_s):
    """
    N_s neighbours of `center` within radius r, as displacements.

    More than N_s candidates: FPS among them, started from the candidate
    nearest the center. Fewer: pad with copies of the nearest candidate.
    None: N_s zero displacements (copies of the center itself).
    """
    points = _points(pc)
    center = np.asarray(center, dtype=np.float64)
    d2 = np.sum((points - center) ** 2, axis=1)
    candidates = np.flatnonzero(d2 <= r * r)

    if len(candidates) == 0:
        return LocalVolume(center.copy(), np.zeros((n_s, 3)))

    nearest = int(np.argmin(d2[candidates]))
    if len(candidates) > n_s:
        picked = candidates[farthest_point_sampling(points[candidates], n_s, start=nearest)]
    else:
        pad = np.full(n_s - len(candidates), candidates[nearest])
        picked = np.concatenate([candidates, pad])
    return LocalVolume(center.copy(), points[picked] - center)


def _frame_seeds(seed, num_frames):
    return np.random.default_rng(seed).integers(0, 2 ** 32, size=num_frames)


def _references(seq, hp, seed):
    """Per frame: FPS reference points and their frame index"""
    seeds = _frame_seeds(seed, seq.num_frames)
    for t in range(seq.num_frames):
        frame = seq.frames[t]
        idx = farthest_point_sampling(frame, hp.num_volumes, seed=int(seeds[t]))
        yield t, frame[idx]


def tokenize(seq, hp, seed):
    """T·N_v spatial local volumes in frame-major order"""
    if seq.num_points < 1:
        raise EmptySceneError('tokenize: frames hold no points')

    references, displacements = [], []
    for t, centers in _references(seq, hp, seed):
        stamp = float(seq.timestamps[t])
        for center in centers:
            volume = ball_group(seq.frames[t], center, hp.radius, hp.num_samples)
            references.append(np.append(center, stamp))
            displacements.append(volume.displacements)

    return TokenBatch(np.array(references), np.array(displacements), hp.num_volumes)


def tokenize_spatiotemporal(seq, hp, seed, temporal_kernel=None):
    """
    Volumes gathered over k_t frames around each reference (ablation path).

    Neighbour frames are clamped at the sequence ends; each displacement is
    extended with δt = (gathered frame index − reference frame index).
    References are identical to `tokenize` under the same seed.
    """
    k_t = temporal_kernel or hp.temporal_kernel
    if k_t % 2 == 0:
        raise ConfigError('temporal_kernel', f'must be odd, got {k_t}')
    half = (k_t - 1) // 2
    last = seq.num_frames - 1

    references, displacements = [], []
    for t, centers in _references(seq, hp, seed):
        stamp = float(seq.timestamps[t])
        for center in centers:
            gathered = []
            for offset in range(-half, half + 1):
                source = min(max(t + offset, 0), last)
                volume = ball_group(seq.frames[source], center, hp.radius, hp.num_samples)
                dt = np.full((hp.num_samples, 1), float(source - t))
                gathered.append(np.concatenate([volume.displacements, dt], axis=1))
            references.append(np.append(center, stamp))
            displacements.append(np.concatenate(gathered, axis=0))

    return TokenBatch(np.array(references), np.array(displacements), hp.num_volumes)


def tokenize_for(seq, hp, seed):
    """Tokenize with the path selected by hp.conv_mode"""
    if hp.conv_mode == 'st':
        return tokenize_spatiotemporal(seq, hp, seed)
    return tokenize(seq, hp, seed)
