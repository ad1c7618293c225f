"""15-joint ITOP skeleton: joint order, bone tree and label records"""

from dataclasses import dataclass

import numpy as np

from spike.errors import DataError

# ITOP joint order
JOINT_NAMES = (
    'head', 'neck',
    'r_shoulder', 'l_shoulder',
    'r_elbow', 'l_elbow',
    'r_hand', 'l_hand',
    'torso',
    'r_hip', 'l_hip',
    'r_knee', 'l_knee',
    'r_foot', 'l_foot',
)
NUM_JOINTS = len(JOINT_NAMES)
JOINT_INDEX = {name: i for i, name in enumerate(JOINT_NAMES)}

# Conventional 14-edge tree used for plotting
BONES = (
    ('head', 'neck'),
    ('neck', 'r_shoulder'), ('r_shoulder', 'r_elbow'), ('r_elbow', 'r_hand'),
    ('neck', 'l_shoulder'), ('l_shoulder', 'l_elbow'), ('l_elbow', 'l_hand'),
    ('neck', 'torso'),
    ('torso', 'r_hip'), ('r_hip', 'r_knee'), ('r_knee', 'r_foot'),
    ('torso', 'l_hip'), ('l_hip', 'l_knee'), ('l_knee', 'l_foot'),
)
BONE_INDEX = tuple((JOINT_INDEX[a], JOINT_INDEX[b]) for a, b in BONES)


def mirror_permutation(names=JOINT_NAMES):
    """Index map swapping every l_/r_ joint with its partner"""
    lookup = {name: i for i, name in enumerate(names)}
    perm = []
    for name in names:
        if name.startswith('l_'):
            perm.append(lookup.get('r_' + name[2:], lookup[name]))
        elif name.startswith('r_'):
            perm.append(lookup.get('l_' + name[2:], lookup[name]))
        else:
            perm.append(lookup[name])
    return np.array(perm, dtype=np.intp)


@dataclass
class SkeletonFrame:
    """Joint coordinates (meters) and per-joint validity for one frame"""

    joints: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.joints.ndim != 2 or self.joints.shape[1] != 3:
            raise DataError(f'joints must be M×3, got {self.joints.shape}')
        if self.valid.shape != (self.joints.shape[0],):
            raise DataError(f'valid flags {self.valid.shape} do not match '
                            f'{self.joints.shape[0]} joints')

    def __repr__(self):
        return f'<SkeletonFrame joints={len(self.joints)} valid={int(self.valid.sum())}>'

    @property
    def num_joints(self):
        return self.joints.shape[0]

    @property
    def has_valid(self):
        return bool(self.valid.any())

    def translated(self, offset):
        return SkeletonFrame(self.joints + np.asarray(offset, dtype=np.float64), self.valid.copy())


@dataclass
class PoseOutput:
    """Predicted joints (meters) in the centered sequence frame"""

    joints: np.ndarray

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=np.float64)
        if self.joints.ndim != 2 or self.joints.shape[1] != 3:
            raise DataError(f'pose must be M×3, got {self.joints.shape}')

    def uncentered(self, centroid):
        """Move back to sensor coordinates"""
        return PoseOutput(self.joints + np.asarray(centroid, dtype=np.float64))

    def to_lines(self):
        return [' '.join(f'{v:.6f}' for v in row) for row in self.joints]
