"""End-to-end scenarios at toy scale; minutes each, run with `pytest -m slow`"""

import numpy as np
import pytest

from spike.data import SyntheticRigConfig, generate_synthetic, window
from spike.evaluation import benchmark_inference, evaluate, evaluation_split, final_frame_indices
from spike.models import HyperParams, NUM_JOINTS, TrainConfig
from spike.network import SpikeModel
from spike.preprocess import center_sequence
from spike.training import train

pytestmark = pytest.mark.slow

TOY = dict(num_points=64, num_volumes=8, num_samples=4, radius=0.3, channels=16, heads=2,
           blocks=2, num_joints=NUM_JOINTS)


def test_overfits_fifty_sequences():
    rig = SyntheticRigConfig(points_per_frame=32, frames_per_sequence=2, noise_sigma=0.0)
    dataset = generate_synthetic(rig, 50, seed=0)
    # 32 volumes over 32 points: FPS takes every point, so each sample keeps the same
    # tokens from epoch to epoch
    hp = HyperParams(seq_len=1, num_points=32, num_volumes=32, num_samples=4, radius=0.3,
                     channels=64, heads=4, blocks=2, num_joints=NUM_JOINTS)
    # 100 samples in batches of 10: 4000 optimizer steps over 400 epochs
    cfg = TrainConfig(batch_size=10, learning_rate=0.01, momentum=0.9, epochs=400, seed=0,
                      augment=False, checkpoint_every=1000, val_fraction=0.0, dtype='float64')

    result = train(dataset, hp, cfg)
    report, _ = evaluate(dataset, hp, result.params, cfg.seed, 0.10)

    assert result.final.loss < result.records[0].loss
    assert report.mean_ap == pytest.approx(100.0)


def _hands_on_occluded_frames(seq_len, seed):
    rig = SyntheticRigConfig(points_per_frame=64, frames_per_sequence=4,
                             occlusion='hide-arm-current-frame')
    dataset = generate_synthetic(rig, 20, seed=seed)
    train_data, held = evaluation_split(dataset, seed)
    hp = HyperParams(seq_len=seq_len, window_mode='past', **TOY)
    cfg = TrainConfig(batch_size=8, learning_rate=0.01, momentum=0.9, epochs=40, seed=seed,
                      augment=False, checkpoint_every=1000, val_fraction=0.0, dtype='float32')

    result = train(train_data, hp, cfg)
    report, _ = evaluate(held, hp, result.params, seed, 0.10,
                         indices=final_frame_indices(held))
    return report.group_ap['Hands']


def test_past_context_recovers_hidden_hand():
    seeds = (0, 1, 2)
    with_context = np.median([_hands_on_occluded_frames(3, s) for s in seeds])
    single_frame = np.median([_hands_on_occluded_frames(1, s) for s in seeds])
    assert with_context >= single_frame


def _median_latency(rig_dataset, **changes):
    hp = HyperParams(seq_len=1, **TOY).replace(**changes)
    model = SpikeModel(hp, seed=0)
    sequences = []
    for index in range(4):
        seq, _ = window(rig_dataset, index, hp.seq_len, hp.window_mode, hp.num_points)
        sequences.append(center_sequence(seq)[0])
    report = benchmark_inference(model, sequences, warmup=3, iters=30)
    assert report.median_ms <= report.p95_ms
    return report.median_ms


def test_latency_grows_with_frames_and_blocks():
    rig = SyntheticRigConfig(points_per_frame=64, frames_per_sequence=4)
    dataset = generate_synthetic(rig, 1, seed=0)

    base = _median_latency(dataset)
    assert _median_latency(dataset, seq_len=3) > base
    assert _median_latency(dataset, blocks=4) > base
