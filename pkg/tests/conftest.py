import os

import numpy as np
import pytest

os.environ.setdefault('SPIKE_ENV', 'testing')
os.environ.setdefault('SPIKE_PROGRESS', 'false')

from spike.data import SyntheticRigConfig, generate_synthetic
from spike.models import (
    Frame, HyperParams, PointCloudSequence, Recording, SequenceDataset, SkeletonFrame,
    TrainConfig, make_frame_id,
)
from spike.network import ModelParams
from spike.utils import configure_logging

# Bind the log handler before any CliRunner swaps the standard streams
configure_logging('WARNING')


def toy_hp(**changes):
    """The small network used across the suite (C=16, N_v=8, N_s=4, T=2, m=2, h=2, M=3)"""
    values = dict(seq_len=2, num_points=64, num_volumes=8, num_samples=4, radius=0.3,
                  channels=16, heads=2, blocks=2, num_joints=3)
    values.update(changes)
    return HyperParams(**values)


def toy_dataset(subjects=('00', '01', '02'), frames=4, points=64, joints=3, seed=0,
                test_subjects=('00',)):
    """Random clouds around the origin, one recording per subject"""
    rng = np.random.default_rng(seed)
    recordings = []
    for subject in subjects:
        rec_frames = []
        for k in range(frames):
            cloud = rng.normal(scale=0.3, size=(points, 3)).astype(np.float32).astype(np.float64)
            skeleton = SkeletonFrame(rng.normal(scale=0.3, size=(joints, 3)),
                                     np.ones(joints, dtype=bool))
            rec_frames.append(Frame(make_frame_id(subject, k), cloud, skeleton))
        recordings.append(Recording(subject, '00', rec_frames))
    return SequenceDataset(recordings, test_subjects)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def hp():
    return toy_hp()


@pytest.fixture
def params(hp):
    return ModelParams.initialize(hp, seed=7, dtype='float64')


@pytest.fixture
def sequence(rng, hp):
    frames = rng.normal(scale=0.3, size=(hp.seq_len, hp.num_points, 3))
    return PointCloudSequence(frames)


@pytest.fixture
def dataset():
    return toy_dataset()


@pytest.fixture
def small_rig():
    return SyntheticRigConfig(points_per_frame=64, frames_per_sequence=3)


@pytest.fixture
def synthetic(small_rig):
    return generate_synthetic(small_rig, 4, seed=3)


@pytest.fixture
def train_cfg():
    return TrainConfig(batch_size=4, learning_rate=0.01, momentum=0.9, epochs=2, seed=0,
                       augment=False, checkpoint_every=1, val_fraction=0.0, dtype='float64')


@pytest.fixture
def workdir(tmp_path):
    """Temporary directory as a plain string path"""
    return str(tmp_path)
