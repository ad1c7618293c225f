"""Masked L1 loss, SGD with momentum and the training loop"""

from spike.training.loss import joint_weights, l1_loss_masked
from spike.training.optimizer import SGD
from spike.training.samples import Sample, SamplePreparer, prepare_sample, sample_seed
from spike.training.state import STATE_NAME, load_train_state, save_train_state
from spike.training.trainer import (
    BEST_NAME, LAST_NAME, LOG_NAME, EpochRecord, TrainResult, split_validation, train,
    train_step, validate,
)

__all__ = [
    'joint_weights', 'l1_loss_masked', 'SGD',
    'Sample', 'SamplePreparer', 'prepare_sample', 'sample_seed',
    'STATE_NAME', 'load_train_state', 'save_train_state',
    'BEST_NAME', 'LAST_NAME', 'LOG_NAME', 'EpochRecord', 'TrainResult',
    'split_validation', 'train', 'train_step', 'validate',
]
