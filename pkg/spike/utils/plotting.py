"""
Skeleton plots: orthographic xy projection of the 14-bone tree.

Ground truth is drawn in red, predictions in blue. The output format
follows the file extension (.svg or .png).
"""

import logging
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from spike.errors import ConfigError
from spike.models import BONES, JOINT_INDEX

logger = logging.getLogger(__name__)

PLOT_FORMATS = ('svg', 'png')
GROUND_TRUTH_COLOR = 'tab:red'
PREDICTION_COLOR = 'tab:blue'


def plot_format(path):
    fmt = os.path.splitext(str(path))[1].lstrip('.').lower()
    if fmt not in PLOT_FORMATS:
        raise ConfigError('plot', f'unsupported plot extension {fmt!r} (use .svg or .png)')
    return fmt


def draw_skeleton(ax, joints, color, valid=None, label=None):
    """Bones and joints of one pose on `ax`; invalid joints and their bones are skipped"""
    joints = np.asarray(joints, dtype=np.float64)
    valid = np.ones(len(joints), dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    for a, b in BONES:
        i, j = JOINT_INDEX[a], JOINT_INDEX[b]
        if i < len(joints) and j < len(joints) and valid[i] and valid[j]:
            ax.plot(joints[[i, j], 0], joints[[i, j], 1], color=color, linewidth=2)
    ax.scatter(joints[valid, 0], joints[valid, 1], color=color, s=12, zorder=3, label=label)
    ax.set_aspect('equal', adjustable='datalim')
    ax.invert_yaxis()  # camera y points down
    ax.set_xlabel('x (m)')
    ax.set_ylabel('y (m)')


def save_pose_plot(path, prediction, ground_truth=None, title=None):
    """Prediction alone, or ground truth and prediction side by side"""
    fmt = plot_format(path)
    panels = 1 if ground_truth is None else 2
    fig, axes = plt.subplots(1, panels, figsize=(4 * panels, 5), squeeze=False)
    axes = axes[0]
    if ground_truth is not None:
        draw_skeleton(axes[0], ground_truth.joints, GROUND_TRUTH_COLOR, ground_truth.valid,
                      label='ground truth')
        axes[0].set_title('ground truth')
    draw_skeleton(axes[-1], prediction, PREDICTION_COLOR, label='prediction')
    axes[-1].set_title('prediction')
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format=fmt)
    plt.close(fig)
    logger.debug('Wrote skeleton plot %s', path)
    return path
