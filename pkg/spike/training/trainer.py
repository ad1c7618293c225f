"""
End-to-end training loop.

One optimizer thread owns the parameters; sample preparation may run on a
thread pool. Every epoch writes one line to the training log:

    epoch=<int> loss=<float> val_map=<float> wall_ms=<int>
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from spike.autodiff import Tape, no_grad
from spike.errors import ConfigError, DataError
from spike.network import ModelParams, forward_tokens, save_checkpoint
from spike.training.loss import joint_weights, l1_loss_masked
from spike.training.optimizer import SGD
from spike.training.samples import SamplePreparer
from spike.training.state import STATE_NAME, load_train_state, save_train_state

logger = logging.getLogger(__name__)

BEST_NAME = 'best.spk'
LAST_NAME = 'last.spk'
LOG_NAME = 'train.log'


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    val_map: float
    wall_ms: int

    def to_line(self):
        return f'epoch={self.epoch} loss={self.loss!r} val_map={self.val_map!r} wall_ms={self.wall_ms}'

    def without_timing(self):
        return self.epoch, self.loss, self.val_map

    @classmethod
    def from_line(cls, line):
        values = dict(token.split('=', 1) for token in line.split())
        return cls(int(values['epoch']), float(values['loss']), float(values['val_map']),
                   int(values['wall_ms']))


@dataclass
class TrainResult:
    params: ModelParams
    records: list = field(default_factory=list)
    best_val_loss: float = float('inf')
    out_dir: str = None

    @property
    def final(self):
        return self.records[-1] if self.records else None


def split_validation(dataset, val_fraction, seed):
    """
    Hold out round(val_fraction · subjects) training subjects for validation.

    Returns (train, validation or None). At least one subject always stays
    in training.
    """
    train = dataset.subset('train')
    subjects = train.subjects
    count = int(round(len(subjects) * val_fraction))
    count = min(count, len(subjects) - 1)
    if count <= 0:
        return train, None
    held = set(np.random.default_rng([int(seed), 0x5A1]).permutation(subjects)[:count])
    return (train.subset(subjects={s for s in subjects if s not in held}),
            train.subset(subjects=held))


def train_step(params, optimizer, samples, hp):
    """Forward + masked L1 + backward + SGD on one batch; returns the batch loss"""
    targets = np.stack([s.target.joints for s in samples])
    valid = np.stack([s.target.valid for s in samples])
    with Tape() as tape:
        pred = forward_tokens([s.tokens for s in samples], hp, params)
        loss = l1_loss_masked(pred, targets, valid)
    tape.backward(loss)
    value = loss.item()
    optimizer.step()
    tape.clear()
    return value


def validate(preparer, indices, hp, params, threshold, batch_size):
    """(mean masked L1 loss, pooled mAP %) without recording a tape"""
    from spike.evaluation.metrics import map_at_threshold

    preds, targets, losses = [], [], []
    for start in range(0, len(indices), batch_size):
        samples = preparer.batch(indices[start:start + batch_size])
        with no_grad():
            out = forward_tokens([s.tokens for s in samples], hp, params).data
        out = np.asarray(out, dtype=np.float64)
        for s, pred in zip(samples, out):
            weights = joint_weights(s.target.valid)
            losses.append(float(np.sum(np.abs(pred - s.target.joints) * weights)))
            preds.append(pred)
            targets.append(s.target)
    report = map_at_threshold(preds, targets, threshold)
    return float(np.mean(losses)), report.mean_ap


def _rewrite_log(path, keep_before):
    """Keep log lines of epochs < keep_before (resume after an interruption)"""
    if not os.path.exists(path):
        return
    with open(path) as fh:
        kept = [line for line in fh
                if line.strip() and EpochRecord.from_line(line).epoch < keep_before]
    with open(path, 'w') as fh:
        fh.writelines(kept)


def train(dataset, hp, cfg, out_dir=None, resume=False, threshold=0.10, progress=False,
          workers=None):
    """
    Train a model on the train split of `dataset`.

    Checkpoints go to `out_dir` (when given) every `cfg.checkpoint_every`
    epochs (`last.spk` plus the resume state) and whenever the validation
    loss improves (`best.spk`). Without validation subjects the training
    frames stand in for validation.
    """
    train_set, val_set = split_validation(dataset, cfg.val_fraction, cfg.seed)
    train_indices = np.array(train_set.eval_indices(), dtype=np.intp)
    if len(train_indices) == 0:
        raise DataError('no labelled frames in the training split')
    if val_set is None or not val_set.eval_indices():
        val_set = train_set
    val_indices = val_set.eval_indices()

    params = ModelParams.initialize(hp, cfg.seed, cfg.dtype)
    optimizer = SGD(params, cfg.learning_rate, cfg.momentum)
    first_epoch, best_val_loss = 1, float('inf')
    records = []

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        log_path = os.path.join(out_dir, LOG_NAME)
        state_path = os.path.join(out_dir, STATE_NAME)
        if resume and os.path.exists(state_path):
            params, velocity, first_epoch, best_val_loss = load_train_state(state_path, cfg.dtype)
            if params.hp != hp:
                field_name = params.hp.diff(hp)[0]
                raise ConfigError(field_name, 'training state was written with a different value')
            optimizer = SGD(params, cfg.learning_rate, cfg.momentum, velocity)
            _rewrite_log(log_path, first_epoch)
            with open(log_path) as fh:
                records = [EpochRecord.from_line(line) for line in fh if line.strip()]
            logger.info('Resuming at epoch %d', first_epoch)
        else:
            open(log_path, 'w').close()

    workers = workers or cfg.workers
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    train_prep = SamplePreparer(train_set, hp, cfg.seed, cfg.augment, executor)
    val_prep = SamplePreparer(val_set, hp, cfg.seed, False, executor)
    logger.info('Training on %d frames (%d validation), %d parameters',
                len(train_indices), len(val_indices), params.num_values)

    try:
        epochs = tqdm(range(first_epoch, cfg.epochs + 1), desc='train', unit='epoch',
                      disable=not progress)
        for epoch in epochs:
            started = time.perf_counter()
            order = np.random.default_rng([cfg.seed, epoch]).permutation(train_indices)

            total, seen = 0.0, 0
            for start in range(0, len(order), cfg.batch_size):
                samples = train_prep.batch(order[start:start + cfg.batch_size], epoch)
                total += train_step(params, optimizer, samples, hp) * len(samples)
                seen += len(samples)

            val_loss, val_map = validate(val_prep, val_indices, hp, params, threshold,
                                         cfg.batch_size)
            record = EpochRecord(epoch, total / seen, val_map,
                                 int(round((time.perf_counter() - started) * 1000)))
            records.append(record)
            logger.info(record.to_line())
            epochs.set_postfix(loss=f'{record.loss:.4f}', val_map=f'{val_map:.1f}')

            if out_dir is not None:
                with open(log_path, 'a') as fh:
                    fh.write(record.to_line() + '\n')
                if val_loss < best_val_loss:
                    best_val_loss = val_loss
                    save_checkpoint(params, hp, os.path.join(out_dir, BEST_NAME))
                if epoch % cfg.checkpoint_every == 0 or epoch == cfg.epochs:
                    save_checkpoint(params, hp, os.path.join(out_dir, LAST_NAME))
                    save_train_state(state_path, params, optimizer, epoch + 1, best_val_loss)
            else:
                best_val_loss = min(best_val_loss, val_loss)
    finally:
        if executor is not None:
            executor.shutdown()

    return TrainResult(params, records, best_val_loss, out_dir)
