"""
Synthetic articulated rig: an animated 15-joint stick figure whose surface
is sampled from capsules around each bone.

Used for desk-scale training and for the occlusion scenario where one arm
disappears from the current (last) frame while its joints stay labelled.
"""

import logging
from dataclasses import dataclass

import numpy as np

from spike.errors import ConfigError
from spike.models import (
    BONES, Frame, JOINT_INDEX, NUM_JOINTS, PointCloud, Recording, SequenceDataset,
    SkeletonFrame, make_frame_id,
)
from spike.models.hyperparams import RecordMixin
from spike.preprocess import resample

logger = logging.getLogger(__name__)

OCCLUSION_MODES = ('none', 'hide-arm-current-frame')
HIDDEN_HAND_CLEARANCE_M = 0.05


@dataclass(frozen=True)
class SyntheticRigConfig(RecordMixin):
    """Body dimensions (meters), motion and sampling settings"""

    torso_length: float = 0.50
    neck_length: float = 0.10
    head_radius: float = 0.10
    shoulder_width: float = 0.36
    hip_width: float = 0.24
    upper_arm: float = 0.28
    forearm: float = 0.26
    thigh: float = 0.42
    shin: float = 0.42
    limb_radius: float = 0.045
    torso_radius: float = 0.11
    motion_amplitude: float = 0.7
    motion_frequency: float = 0.08
    distance_m: float = 2.5
    points_per_frame: int = 256
    frames_per_sequence: int = 6
    noise_sigma: float = 0.005
    occlusion: str = 'none'
    hidden_arm: str = 'l'

    def __post_init__(self):
        for name in ('torso_length', 'neck_length', 'head_radius', 'shoulder_width',
                     'hip_width', 'upper_arm', 'forearm', 'thigh', 'shin', 'limb_radius',
                     'torso_radius', 'motion_amplitude', 'motion_frequency', 'distance_m',
                     'points_per_frame', 'frames_per_sequence'):
            if getattr(self, name) <= 0:
                raise ConfigError(name, f'must be positive, got {getattr(self, name)}')
        if self.noise_sigma < 0:
            raise ConfigError('noise_sigma', 'must be non-negative')
        if self.occlusion not in OCCLUSION_MODES:
            raise ConfigError('occlusion', f'expected one of {OCCLUSION_MODES}')
        if self.hidden_arm not in ('l', 'r'):
            raise ConfigError('hidden_arm', "expected 'l' or 'r'")


def _limb(origin, length, pitch, roll=0.0):
    """End point of a segment hanging along +y (camera down), pitched in y-z, rolled in x"""
    direction = np.array([np.sin(roll),
                          np.cos(roll) * np.cos(pitch),
                          np.cos(roll) * np.sin(pitch)])
    return origin + length * direction


def pose_at(cfg, phase, style):
    """Joint positions (body frame, y down) for one animation phase"""
    a = cfg.motion_amplitude * style['amplitude']
    j = np.zeros((NUM_JOINTS, 3))

    def put(name, value):
        j[JOINT_INDEX[name]] = value

    torso_top = np.array([0.0, -cfg.torso_length, 0.0])
    put('neck', torso_top)
    put('head', torso_top + np.array([0.0, -(cfg.neck_length + cfg.head_radius), 0.0]))
    put('torso', np.array([0.0, -cfg.torso_length / 2, 0.0]))

    for side, sign, offset in (('r', -1.0, 0.0), ('l', 1.0, np.pi)):
        swing = a * np.sin(phase + offset)
        lift = style['lift'] * a * (1.0 + np.sin(2 * phase + offset)) / 2
        shoulder = torso_top + np.array([sign * cfg.shoulder_width / 2, 0.0, 0.0])
        elbow = _limb(shoulder, cfg.upper_arm, swing, sign * lift)
        bend = a * (1.0 + np.cos(phase + offset)) / 2
        hand = _limb(elbow, cfg.forearm, swing + bend, sign * lift)
        put(f'{side}_shoulder', shoulder)
        put(f'{side}_elbow', elbow)
        put(f'{side}_hand', hand)

        hip = np.array([sign * cfg.hip_width / 2, 0.0, 0.0])
        step = -0.5 * a * np.sin(phase + offset)
        knee = _limb(hip, cfg.thigh, step)
        foot = _limb(knee, cfg.shin, step - 0.5 * a * (1.0 + np.sin(phase + offset)) / 2)
        put(f'{side}_hip', hip)
        put(f'{side}_knee', knee)
        put(f'{side}_foot', foot)
    return j


TORSO_BONES = {('neck', 'torso'), ('torso', 'r_hip'), ('torso', 'l_hip')}


def _bone_radius(cfg, a, b):
    if (a, b) in TORSO_BONES:
        return cfg.torso_radius
    return cfg.limb_radius


def sample_surface(cfg, joints, count, rng):
    """`count` points on the bone capsules plus the head sphere; returns (points, bone ids)"""
    segments = [(JOINT_INDEX[a], JOINT_INDEX[b], _bone_radius(cfg, a, b))
                for a, b in BONES if a != 'head']
    head = JOINT_INDEX['head']
    segments.append((head, head, cfg.head_radius))

    areas = []
    for a, b, radius in segments:
        length = np.linalg.norm(joints[b] - joints[a])
        areas.append(4 * np.pi * radius ** 2 if a == b else 2 * np.pi * radius * length)
    areas = np.array(areas)
    owner = rng.choice(len(segments), size=count, p=areas / areas.sum())

    points = np.empty((count, 3))
    for i, seg in enumerate(owner):
        a, b, radius = segments[seg]
        start, end = joints[a], joints[b]
        u = rng.normal(size=3)
        if a == b:
            points[i] = start + radius * u / np.linalg.norm(u)
            continue
        axis = (end - start) / np.linalg.norm(end - start)
        u -= axis * np.dot(u, axis)
        points[i] = start + rng.random() * (end - start) + radius * u / np.linalg.norm(u)

    if cfg.noise_sigma > 0:
        points += rng.normal(scale=cfg.noise_sigma, size=points.shape)
    return points, owner, segments


def _hidden_arm_mask(cfg, joints, points, owner, segments):
    """Points to drop so the hidden arm is absent from the frame"""
    side = cfg.hidden_arm
    arm = {JOINT_INDEX[f'{side}_shoulder'], JOINT_INDEX[f'{side}_elbow'], JOINT_INDEX[f'{side}_hand']}
    on_arm = np.array([segments[s][0] in arm and segments[s][1] in arm for s in owner])
    hand = joints[JOINT_INDEX[f'{side}_hand']]
    # Margin keeps the clearance strict after float32 rounding
    near_hand = np.linalg.norm(points - hand, axis=1) < HIDDEN_HAND_CLEARANCE_M + 1e-3
    return on_arm | near_hand


def _place(joints, yaw, offset):
    c, s = np.cos(yaw), np.sin(yaw)
    rot = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return joints @ rot.T + offset


def generate_sequence(cfg, rng, subject, recording='00'):
    """One recording of `frames_per_sequence` frames"""
    style = {
        'phase': rng.uniform(0, 2 * np.pi),
        'amplitude': rng.uniform(0.6, 1.2),
        'lift': rng.uniform(0.3, 1.0),
    }
    yaw = rng.uniform(-np.pi / 4, np.pi / 4)
    offset = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1),
                       cfg.distance_m + rng.uniform(-0.3, 0.3)])

    frames = []
    last = cfg.frames_per_sequence - 1
    for k in range(cfg.frames_per_sequence):
        phase = style['phase'] + 2 * np.pi * cfg.motion_frequency * k
        local = pose_at(cfg, phase, style)
        joints = _place(local, yaw, offset)

        points, owner, segments = sample_surface(cfg, joints, 2 * cfg.points_per_frame, rng)
        if cfg.occlusion == 'hide-arm-current-frame' and k == last:
            points = points[~_hidden_arm_mask(cfg, joints, points, owner, segments)]
        cloud = resample(PointCloud(points), cfg.points_per_frame, int(rng.integers(2 ** 32)))

        # Stored at float32 precision, like the native point files
        stored = cloud.points.astype(np.float32).astype(np.float64)
        skeleton = SkeletonFrame(joints, np.ones(NUM_JOINTS, dtype=bool))
        frames.append(Frame(make_frame_id(subject, k), stored, skeleton))
    return Recording(subject, recording, frames)


def generate_synthetic(cfg, n_sequences, seed):
    """
    `n_sequences` recordings, one synthetic subject each, all in the train split.

    Bit-exact under a fixed seed.
    """
    rng = np.random.default_rng(seed)
    recordings = [generate_sequence(cfg, rng, f'{i:02d}') for i in range(n_sequences)]
    logger.debug('Generated %d synthetic recordings (occlusion=%s)', n_sequences, cfg.occlusion)
    return SequenceDataset(recordings, test_subjects=())
