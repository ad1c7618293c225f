"""Window → centred, optionally augmented, tokenized training/eval sample"""

from dataclasses import dataclass

import numpy as np

from spike.data import window
from spike.models import JOINT_NAMES, SkeletonFrame, TokenBatch
from spike.preprocess import augment, center_sequence
from spike.tokenizer import tokenize_for


@dataclass
class Sample:
    """Network input and target for one frame, in the centred frame"""

    index: int
    tokens: TokenBatch
    target: SkeletonFrame
    centroid: np.ndarray


def sample_seed(seed, index, epoch=None):
    """Per-sample seed; independent of visiting order and worker count"""
    if epoch is None:
        return [int(seed), int(index)]
    return [int(seed), int(epoch), int(index)]


def prepare_sample(dataset, index, hp, seed, epoch=None, augmented=False):
    """
    Resample the window for frame `index` to N points, centre it on its
    centroid, augment it when asked and tokenize it.

    Augmentation and tokenization draw from (seed, epoch, index); without
    augmentation the sample depends on (seed, index) only and can be cached.
    """
    seq, target = window(dataset, index, hp.seq_len, hp.window_mode,
                         num_points=hp.num_points, seed=seed)
    seq, centroid = center_sequence(seq)
    target = target.translated(-centroid)

    if augmented:
        local = sample_seed(seed, index, epoch)
        names = JOINT_NAMES if target.num_joints == len(JOINT_NAMES) else \
            tuple(f'joint{j}' for j in range(target.num_joints))
        seq, target = augment(seq, target, local, names=names)
        token_seed = local
    else:
        token_seed = sample_seed(seed, index)

    return Sample(index, tokenize_for(seq, hp, token_seed), target, centroid)


class SamplePreparer:
    """Prepares samples for one dataset, caching the ones without augmentation"""

    def __init__(self, dataset, hp, seed, augmented=False, executor=None):
        self.dataset = dataset
        self.hp = hp
        self.seed = seed
        self.augmented = augmented
        self.executor = executor
        self._cache = {}

    def __repr__(self):
        return f'<SamplePreparer cached={len(self._cache)} augmented={self.augmented}>'

    def get(self, index, epoch=None):
        if self.augmented:
            return prepare_sample(self.dataset, index, self.hp, self.seed, epoch, True)
        if index not in self._cache:
            self._cache[index] = prepare_sample(self.dataset, index, self.hp, self.seed)
        return self._cache[index]

    def batch(self, indices, epoch=None):
        """Samples in the order of `indices`"""
        if self.executor is None:
            return [self.get(int(i), epoch) for i in indices]
        return list(self.executor.map(lambda i: self.get(int(i), epoch), indices))
