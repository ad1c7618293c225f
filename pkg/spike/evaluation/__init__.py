"""mAP reports, batch inference, latency benchmark and ablation sweeps"""

from spike.evaluation.metrics import (
    BODY_GROUPS, DEFAULT_THRESHOLD_M, JOINT_GROUPS, TABLE_ROWS, EvalReport, joint_names_for,
    map_at_threshold,
)
from spike.evaluation.runner import (
    Predictions, evaluate, final_frame_indices, predict_clouds, predict_frames,
)
from spike.evaluation.benchmark import BenchmarkReport, benchmark_inference
from spike.evaluation.ablation import (
    DEFAULT_KERNELS, AblationCell, clamp_kernel, evaluation_split, format_grid, grid,
    run_ablation,
)

__all__ = [
    'BODY_GROUPS', 'DEFAULT_THRESHOLD_M', 'JOINT_GROUPS', 'TABLE_ROWS', 'EvalReport',
    'joint_names_for', 'map_at_threshold',
    'Predictions', 'evaluate', 'final_frame_indices', 'predict_clouds', 'predict_frames',
    'BenchmarkReport', 'benchmark_inference',
    'DEFAULT_KERNELS', 'AblationCell', 'clamp_kernel', 'evaluation_split', 'format_grid',
    'grid', 'run_ablation',
]
