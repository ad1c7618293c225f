"""Sequence-length / window / convolution sweep at toy scale"""

import logging
import time
import tracemalloc
from dataclasses import asdict, dataclass

from spike.evaluation.runner import evaluate, final_frame_indices
from spike.training import split_validation, train

logger = logging.getLogger(__name__)

SEQ_LENS = (1, 2, 3, 4)
WINDOW_MODES = ('past', 'past-future')
DEFAULT_KERNELS = (3,)
HOLDOUT_FRACTION = 0.2


@dataclass
class AblationCell:
    seq_len: int
    window_mode: str
    conv_mode: str
    temporal_kernel: int
    mean_ap: float
    hands_ap: float
    final_frame_hands_ap: float
    peak_memory_mb: float
    wall_ms: int

    def to_line(self):
        return ' '.join(f'{k}={v!r}' if isinstance(v, float) else f'{k}={v}'
                        for k, v in asdict(self).items())


def clamp_kernel(k_t, seq_len):
    """Largest odd kernel ≤ min(k_t, seq_len)"""
    k = min(k_t, seq_len)
    return k if k % 2 else k - 1


def grid(kernels=DEFAULT_KERNELS, seq_lens=SEQ_LENS, window_modes=WINDOW_MODES):
    """(seq_len, window_mode, conv_mode, temporal_kernel) for every cell"""
    cells = []
    for seq_len in seq_lens:
        for mode in window_modes:
            cells.append((seq_len, mode, 'spatial', 1))
            for k_t in kernels:
                cell = (seq_len, mode, 'st', clamp_kernel(k_t, seq_len))
                if cell not in cells:
                    cells.append(cell)
    return cells


def evaluation_split(dataset, seed):
    """(train data, held-out data): the test split, or held-out subjects"""
    test = dataset.subset('test')
    if len(test):
        return dataset.subset('train'), test
    train_part, held = split_validation(dataset, HOLDOUT_FRACTION, seed)
    return train_part, held if held is not None else train_part


def _hands(report):
    return report.group_ap.get('Hands', float('nan'))


def run_cell(train_data, eval_data, hp, cfg, threshold):
    tracemalloc.start()
    started = time.perf_counter()
    try:
        result = train(train_data, hp, cfg, threshold=threshold)
        report, _ = evaluate(eval_data, hp, result.params, cfg.seed, threshold)
        final, _ = evaluate(eval_data, hp, result.params, cfg.seed, threshold,
                            indices=final_frame_indices(eval_data))
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return AblationCell(hp.seq_len, hp.window_mode, hp.conv_mode, hp.temporal_kernel,
                        report.mean_ap, _hands(report), _hands(final), peak / 2 ** 20,
                        int(round((time.perf_counter() - started) * 1000)))


def run_ablation(dataset, hp, cfg, kernels=DEFAULT_KERNELS, threshold=0.10, seq_lens=SEQ_LENS,
                 progress=None):
    """Train and evaluate one model per grid cell; returns the cells in grid order"""
    train_data, eval_data = evaluation_split(dataset, cfg.seed)
    # Validation comes from the training part only; held-out subjects stay unseen
    cells = []
    for seq_len, mode, conv, k_t in grid(kernels, seq_lens):
        cell_hp = hp.replace(seq_len=seq_len, window_mode=mode, conv_mode=conv,
                             temporal_kernel=k_t)
        cell = run_cell(train_data, eval_data, cell_hp, cfg, threshold)
        logger.info(cell.to_line())
        cells.append(cell)
        if progress is not None:
            progress(cell)
    return cells


def format_grid(cells):
    """One row per cell: T, window, convolution, mean mAP, hands mAP and peak memory"""
    lines = [f'{"T":>2} {"window":<12}{"conv":<8}{"k_t":>4}{"mAP":>9}{"hands":>9}{"peak MB":>10}']
    for c in cells:
        lines.append(f'{c.seq_len:>2} {c.window_mode:<12}{c.conv_mode:<8}{c.temporal_kernel:>4}'
                     f'{c.mean_ap:9.2f}{c.hands_ap:9.2f}{c.peak_memory_mb:10.1f}')
    return '\n'.join(lines)
