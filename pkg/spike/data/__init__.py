"""Datasets: native on-disk layout, ITOP ingestion, windows and the synthetic rig"""

from spike.data.native import (
    POINTS_MAGIC, load_itop, load_native, load_recording, read_points, save_native,
    write_points,
)
from spike.data.windows import WINDOW_MODES, window, window_positions
from spike.data.synthetic import (
    OCCLUSION_MODES, SyntheticRigConfig, generate_sequence, generate_synthetic, pose_at,
)

__all__ = [
    'POINTS_MAGIC', 'load_itop', 'load_native', 'load_recording', 'read_points',
    'save_native', 'write_points',
    'WINDOW_MODES', 'window', 'window_positions',
    'OCCLUSION_MODES', 'SyntheticRigConfig', 'generate_sequence', 'generate_synthetic',
    'pose_at',
]
