"""
Native on-disk sequence format.

    <root>/dataset.txt                      test_subjects=<comma list>   (optional)
    <root>/<subject>_<recording>/manifest.txt
        subject=<id> recording=<id> frames=<n>
    <root>/<subject>_<recording>/labels.txt
        frame=<id> joints=<3M floats comma-separated> valid=<M bits>
    <root>/<subject>_<recording>/frames/<frame id>.bin
        b'SPPC' | u32 count | count × 3 float32 (x, y, z meters), little-endian

Frames are ordered as their labels are listed. Every point file needs a
label line and every label line needs a point file.
"""

import logging
import os
import struct

import numpy as np

from spike.errors import DataError
from spike.models import (
    ITOP_TEST_SUBJECTS, Frame, NUM_JOINTS, Recording, SequenceDataset, SkeletonFrame,
)
from spike.utils.binary import ByteReader

logger = logging.getLogger(__name__)

POINTS_MAGIC = b'SPPC'
MANIFEST_NAME = 'manifest.txt'
LABELS_NAME = 'labels.txt'
FRAMES_DIR = 'frames'
DATASET_NAME = 'dataset.txt'


# -- records -----------------------------------------------------------

def parse_record(line):
    """'a=1 b=2' → {'a': '1', 'b': '2'}"""
    values = {}
    for token in line.split():
        key, sep, value = token.partition('=')
        if not sep:
            raise ValueError(f'expected key=value, got {token!r}')
        values[key] = value
    return values


def format_label(frame):
    joints = ','.join(repr(float(v)) for v in frame.skeleton.joints.reshape(-1))
    valid = ''.join('1' if v else '0' for v in frame.skeleton.valid)
    return f'frame={frame.frame_id} joints={joints} valid={valid}'


def parse_label(line, path, line_no, num_joints):
    try:
        record = parse_record(line)
        frame_id = record['frame']
        joints = np.array([float(v) for v in record['joints'].split(',')], dtype=np.float64)
        bits = record['valid']
    except (KeyError, ValueError) as e:
        raise DataError(f'malformed label record: {e}', path=path, offset=f'line {line_no}') from e

    if set(bits) - {'0', '1'}:
        raise DataError(f'valid flags must be 0/1 bits, got {bits!r}', path=path,
                        offset=f'line {line_no}')
    if num_joints is not None and (joints.size != 3 * num_joints or len(bits) != num_joints):
        raise DataError(f'frame {frame_id}: expected {num_joints} joints, got '
                        f'{joints.size // 3} coordinates / {len(bits)} flags',
                        path=path, offset=f'line {line_no}')
    if joints.size != 3 * len(bits):
        raise DataError(f'frame {frame_id}: {joints.size} coordinates for {len(bits)} joints',
                        path=path, offset=f'line {line_no}')
    valid = np.array([b == '1' for b in bits], dtype=bool)
    return frame_id, SkeletonFrame(joints.reshape(-1, 3), valid)


# -- point files -------------------------------------------------------

def write_points(path, points):
    points = np.ascontiguousarray(points, dtype='<f4').reshape(-1, 3)
    with open(path, 'wb') as fh:
        fh.write(POINTS_MAGIC + struct.pack('<I', len(points)) + points.tobytes())


def read_points(path):
    with open(path, 'rb') as fh:
        reader = ByteReader(fh.read(), path, error=DataError)
    if reader.take(4, 'magic') != POINTS_MAGIC:
        reader.fail('not a point file (bad magic)', offset=0)
    (count,) = reader.unpack('<I', 'point count')
    data = np.frombuffer(reader.take(12 * count, f'{count} points'), dtype='<f4')
    if not reader.at_end():
        reader.fail(f'point count {count} does not match file size', offset=4)
    points = data.reshape(count, 3).astype(np.float64)
    if not np.all(np.isfinite(points)):
        reader.fail('non-finite coordinates', offset=8)
    return points


# -- datasets ----------------------------------------------------------

def _recording_dir(root, rec):
    return os.path.join(root, f'{rec.subject}_{rec.recording}')


def save_native(dataset, root):
    """Write `dataset` under `root` in the native layout"""
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, DATASET_NAME), 'w') as fh:
        fh.write(f'test_subjects={",".join(sorted(dataset.test_subjects))}\n')

    for rec in dataset.recordings:
        rec_dir = _recording_dir(root, rec)
        os.makedirs(os.path.join(rec_dir, FRAMES_DIR), exist_ok=True)
        with open(os.path.join(rec_dir, MANIFEST_NAME), 'w') as fh:
            fh.write(f'subject={rec.subject} recording={rec.recording} frames={len(rec)}\n')
        with open(os.path.join(rec_dir, LABELS_NAME), 'w') as fh:
            for frame in rec.frames:
                fh.write(format_label(frame) + '\n')
        for frame in rec.frames:
            write_points(os.path.join(rec_dir, FRAMES_DIR, f'{frame.frame_id}.bin'), frame.points)

    logger.info('Wrote %d recordings (%d frames) to %s', len(dataset.recordings), len(dataset), root)


def _read_test_subjects(root, default):
    path = os.path.join(root, DATASET_NAME)
    if not os.path.exists(path):
        return default
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            if line.strip():
                try:
                    listed = parse_record(line)['test_subjects']
                except (KeyError, ValueError) as e:
                    raise DataError(f'malformed dataset record: {e}', path=path,
                                    offset=f'line {line_no}') from e
                return frozenset(s for s in listed.split(',') if s)
    return default


def load_recording(rec_dir, num_joints=None):
    manifest_path = os.path.join(rec_dir, MANIFEST_NAME)
    labels_path = os.path.join(rec_dir, LABELS_NAME)
    frames_dir = os.path.join(rec_dir, FRAMES_DIR)

    try:
        with open(manifest_path) as fh:
            manifest = parse_record(fh.readline())
        subject, recording = manifest['subject'], manifest['recording']
        count = int(manifest['frames'])
    except OSError as e:
        raise DataError(f'cannot read manifest: {e}', path=manifest_path) from e
    except (KeyError, ValueError) as e:
        raise DataError(f'malformed manifest: {e}', path=manifest_path, offset='line 1') from e

    labels = []
    try:
        with open(labels_path) as fh:
            for line_no, line in enumerate(fh, 1):
                if line.strip():
                    labels.append(parse_label(line, labels_path, line_no, num_joints))
    except OSError as e:
        raise DataError(f'cannot read labels: {e}', path=labels_path) from e

    point_ids = {name[:-4] for name in os.listdir(frames_dir) if name.endswith('.bin')} \
        if os.path.isdir(frames_dir) else set()
    label_ids = [frame_id for frame_id, _ in labels]
    unlabelled = sorted(point_ids - set(label_ids))
    if unlabelled:
        raise DataError(f'missing label for frame {unlabelled[0]}', path=labels_path)
    missing = [frame_id for frame_id in label_ids if frame_id not in point_ids]
    if missing:
        raise DataError(f'no point file for labelled frame {missing[0]}', path=frames_dir)
    if len(label_ids) != len(set(label_ids)):
        raise DataError('duplicate frame ids in labels', path=labels_path)
    if count != len(labels):
        raise DataError(f'manifest lists {count} frames, found {len(labels)}', path=manifest_path)

    frames = [Frame(frame_id, read_points(os.path.join(frames_dir, f'{frame_id}.bin')), skeleton)
              for frame_id, skeleton in labels]
    return Recording(subject, recording, frames)


def load_native(root, num_joints=None, test_subjects=None):
    """Load and validate every recording below `root`"""
    if not os.path.isdir(root):
        raise DataError('dataset directory not found', path=root)
    default = ITOP_TEST_SUBJECTS if test_subjects is None else frozenset(test_subjects)
    split = _read_test_subjects(root, default) if test_subjects is None else default

    recordings = []
    for name in sorted(os.listdir(root)):
        rec_dir = os.path.join(root, name)
        if os.path.isdir(rec_dir) and os.path.exists(os.path.join(rec_dir, MANIFEST_NAME)):
            recordings.append(load_recording(rec_dir, num_joints))
    if not recordings:
        raise DataError('no recordings found', path=root)

    dataset = SequenceDataset(recordings, split)
    logger.info('Loaded %s from %s', dataset, root)
    return dataset


def load_itop(root):
    """
    ITOP front-view data converted to the native layout.

    Exactly 15 joints per labelled frame; subjects 00-04 form the test split.
    Frames whose joints are all invalid stay in their recording (they provide
    window context) but never become evaluation targets.
    """
    dataset = load_native(root, num_joints=NUM_JOINTS, test_subjects=ITOP_TEST_SUBJECTS)
    for rec in dataset.recordings:
        for frame in rec.frames:
            subject = frame.frame_id.split('_', 1)[0]
            if subject != rec.subject:
                raise DataError(f'frame {frame.frame_id} does not belong to subject {rec.subject}',
                                path=_recording_dir(root, rec))
    return dataset
