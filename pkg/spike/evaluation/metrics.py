"""
mAP at a distance threshold.

A valid joint counts as a hit when its 3D prediction error is strictly
below the threshold. Hits and totals are kept as integers, so every
percentage is an exact ratio of counts.
"""

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from spike.errors import DataError, DimensionError
from spike.models import JOINT_NAMES, PoseOutput, SkeletonFrame

DEFAULT_THRESHOLD_M = 0.10

# Table rows; paired rows pool both sides
JOINT_GROUPS = OrderedDict([
    ('Head', ('head',)),
    ('Neck', ('neck',)),
    ('Shoulders', ('r_shoulder', 'l_shoulder')),
    ('Elbows', ('r_elbow', 'l_elbow')),
    ('Hands', ('r_hand', 'l_hand')),
    ('Torso', ('torso',)),
    ('Hips', ('r_hip', 'l_hip')),
    ('Knees', ('r_knee', 'l_knee')),
    ('Feet', ('r_foot', 'l_foot')),
])
BODY_GROUPS = OrderedDict([
    ('Upper Body', ('head', 'neck', 'r_shoulder', 'l_shoulder', 'r_elbow', 'l_elbow',
                    'r_hand', 'l_hand', 'torso')),
    ('Lower Body', ('r_hip', 'l_hip', 'r_knee', 'l_knee', 'r_foot', 'l_foot')),
])
TABLE_ROWS = list(JOINT_GROUPS) + list(BODY_GROUPS) + ['Mean']


def _percent(hits, total):
    return 100.0 * int(hits) / int(total)


@dataclass
class EvalReport:
    """Per-joint integer counts and the percentages derived from them"""

    threshold_m: float
    joint_names: tuple
    hits: np.ndarray
    totals: np.ndarray

    def __repr__(self):
        return f'<EvalReport threshold={self.threshold_m} mean_ap={self.mean_ap:.2f}>'

    @property
    def per_joint_ap(self):
        """name → AP over the frames where that joint is valid"""
        return OrderedDict((name, _percent(h, t))
                           for name, h, t in zip(self.joint_names, self.hits, self.totals) if t)

    def _pooled(self, names):
        index = [self.joint_names.index(n) for n in names if n in self.joint_names]
        hits = int(self.hits[index].sum()) if index else 0
        total = int(self.totals[index].sum()) if index else 0
        return _percent(hits, total) if total else None

    @property
    def group_ap(self):
        """Table groups and upper/lower body, pooled over their joints"""
        groups = OrderedDict()
        for name, members in list(JOINT_GROUPS.items()) + list(BODY_GROUPS.items()):
            ap = self._pooled(members)
            if ap is not None:
                groups[name] = ap
        return groups

    @property
    def mean_ap(self):
        """Percentage of all valid joints that are hits"""
        return _percent(int(self.hits.sum()), int(self.totals.sum()))

    @property
    def mean_of_joints(self):
        """Average of the per-joint rows"""
        rows = list(self.per_joint_ap.values())
        if not rows:
            raise DataError('no valid joints to average')
        return float(np.mean(rows))

    def to_table(self):
        groups = self.group_ap
        lines = [f'mAP@{self.threshold_m:.2f}m', f'{"Joint":<12}{"AP (%)":>8}']
        for row in TABLE_ROWS[:-1]:
            value = f'{groups[row]:8.2f}' if row in groups else f'{"-":>8}'
            lines.append(f'{row:<12}{value}')
        lines.append(f'{"Mean":<12}{self.mean_ap:8.2f}')
        lines.append(f'{"Joint mean":<12}{self.mean_of_joints:8.2f}')
        return '\n'.join(lines)

    def to_lines(self):
        """Line-delimited records: one per joint, one per group, then the means"""
        lines = [f'joint={name} ap={ap!r}' for name, ap in self.per_joint_ap.items()]
        lines += [f'group={name.lower().replace(" ", "_")} ap={ap!r}'
                  for name, ap in self.group_ap.items()]
        lines.append(f'mean_ap={self.mean_ap!r} mean_of_joints={self.mean_of_joints!r} '
                     f'threshold_m={self.threshold_m!r}')
        return lines

    def to_dict(self):
        return {
            'threshold_m': self.threshold_m,
            'per_joint_ap': dict(self.per_joint_ap),
            'group_ap': dict(self.group_ap),
            'mean_ap': self.mean_ap,
            'mean_of_joints': self.mean_of_joints,
            'hits': self.hits.tolist(),
            'totals': self.totals.tolist(),
        }


def _joints(value):
    if isinstance(value, PoseOutput):
        return value.joints
    if isinstance(value, SkeletonFrame):
        return value.joints
    return np.asarray(value, dtype=np.float64)


def joint_names_for(num_joints):
    if num_joints == len(JOINT_NAMES):
        return JOINT_NAMES
    if num_joints < len(JOINT_NAMES):
        return JOINT_NAMES[:num_joints]
    return tuple(f'joint{j}' for j in range(num_joints))


def map_at_threshold(preds, targets, threshold=DEFAULT_THRESHOLD_M, joint_names=None):
    """
    EvalReport over aligned predictions (M×3 arrays or PoseOutput) and
    target SkeletonFrames; only valid target joints are scored.
    """
    if len(preds) != len(targets):
        raise DimensionError('map_at_threshold (frame count)', (len(preds),), (len(targets),))
    if not targets:
        raise DataError('no frames to evaluate')

    pred = np.stack([_joints(p) for p in preds])
    gt = np.stack([t.joints for t in targets])
    valid = np.stack([t.valid for t in targets])
    if pred.shape != gt.shape:
        raise DimensionError('map_at_threshold', pred.shape, gt.shape)
    if not valid.any():
        raise DataError('no valid joints to score')

    hit = (np.linalg.norm(pred - gt, axis=-1) < threshold) & valid
    names = tuple(joint_names) if joint_names is not None else joint_names_for(gt.shape[1])
    return EvalReport(float(threshold), names,
                      hit.sum(axis=0).astype(np.int64), valid.sum(axis=0).astype(np.int64))
