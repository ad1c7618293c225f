# Import all domain records so callers can use a single import path
from spike.models.geometry import DepthFrame, PointCloud, PointCloudSequence, LocalVolume, TokenBatch
from spike.models.skeleton import (
    BONES, BONE_INDEX, JOINT_INDEX, JOINT_NAMES, NUM_JOINTS, PoseOutput, SkeletonFrame,
    mirror_permutation,
)
from spike.models.hyperparams import HyperParams, SegmentationConfig, TrainConfig
from spike.models.dataset import (
    ITOP_TEST_SUBJECTS, Frame, Recording, SequenceDataset, make_frame_id,
)

__all__ = [
    'DepthFrame',
    'PointCloud',
    'PointCloudSequence',
    'LocalVolume',
    'TokenBatch',
    'BONES',
    'BONE_INDEX',
    'JOINT_INDEX',
    'JOINT_NAMES',
    'NUM_JOINTS',
    'PoseOutput',
    'SkeletonFrame',
    'mirror_permutation',
    'HyperParams',
    'SegmentationConfig',
    'TrainConfig',
    'ITOP_TEST_SUBJECTS',
    'Frame',
    'Recording',
    'SequenceDataset',
    'make_frame_id',
]
