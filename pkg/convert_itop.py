#!/usr/bin/env python3
"""
ITOP → native dataset converter.

Reads the ITOP front-view exports (depth maps + labels, HDF5) or a folder of
16-bit depth PNGs named <subject>_<index>.png with a native labels file,
isolates the human in every frame and writes the native layout that
`load_itop` reads.

    python convert_itop.py --depth ITOP_front_train_depth_map.h5 \
        --labels ITOP_front_train_labels.h5 --out data/itop
"""

import os
import sys
import traceback

import click
import numpy as np

from spike import create_runtime
from spike.data import save_native
from spike.data.native import parse_label
from spike.errors import DataError, EmptySceneError, SpikeError
from spike.models import (
    DepthFrame, Frame, ITOP_TEST_SUBJECTS, NUM_JOINTS, Recording, SegmentationConfig,
    SequenceDataset, SkeletonFrame,
)
from spike.preprocess import ITOP_INTRINSICS, HumanSegmenter, load_depth_image, resample

try:
    import h5py
except ImportError:
    h5py = None


def _decode_id(raw):
    return raw.decode('utf-8') if isinstance(raw, bytes) else str(raw)


# ITOP real-world coordinates are y-up; back-projected depth pixels are y-down
ITOP_TO_CAMERA = np.array([1.0, -1.0, 1.0])


def itop_to_camera(joints):
    """ITOP label joints in the frame of `depth_to_points` clouds"""
    return np.asarray(joints, dtype=np.float64) * ITOP_TO_CAMERA


def read_h5(depth_path, labels_path):
    """Yield (frame id, DepthFrame, SkeletonFrame) from the ITOP HDF5 pair"""
    if h5py is None:
        raise DataError('h5py is not installed; convert PNG folders instead or install h5py')

    with h5py.File(depth_path, 'r') as depth_file, h5py.File(labels_path, 'r') as label_file:
        ids = [_decode_id(v) for v in depth_file['id'][:]]
        label_ids = [_decode_id(v) for v in label_file['id'][:]]
        if ids != label_ids:
            raise DataError('depth and label files list different frame ids', path=labels_path)

        joints = label_file['real_world_coordinates']
        valid = np.asarray(label_file['is_valid'][:], dtype=bool)
        for i, frame_id in enumerate(ids):
            flags = valid[i] if valid.ndim == 2 else np.full(NUM_JOINTS, valid[i])
            yield (frame_id,
                   DepthFrame(np.asarray(depth_file['data'][i], dtype=np.float64), **ITOP_INTRINSICS),
                   SkeletonFrame(itop_to_camera(joints[i]), flags))


def read_png_folder(depth_dir, labels_path, scale):
    """Yield (frame id, DepthFrame, SkeletonFrame) from <id>.png files plus a labels file"""
    labels = {}
    with open(labels_path) as fh:
        for line_no, line in enumerate(fh, 1):
            if line.strip():
                frame_id, skeleton = parse_label(line, labels_path, line_no, NUM_JOINTS)
                labels[frame_id] = skeleton

    for name in sorted(os.listdir(depth_dir)):
        if not name.lower().endswith('.png'):
            continue
        frame_id = name[:-4]
        if frame_id not in labels:
            raise DataError(f'missing label for frame {frame_id}', path=labels_path)
        yield frame_id, load_depth_image(os.path.join(depth_dir, name), scale), labels[frame_id]


def split_recordings(frames):
    """Group (frame id, points, skeleton) by subject; a gap in frame index starts a new recording"""
    recordings, current, last = [], [], None
    for frame_id, points, skeleton in frames:
        subject, index = frame_id.split('_', 1)
        index = int(index)
        if current and (subject != current[0][0] or index != last + 1):
            recordings.append(current)
            current = []
        current.append((subject, frame_id, points, skeleton))
        last = index

    if current:
        recordings.append(current)

    result, counters = [], {}
    for group in recordings:
        subject = group[0][0]
        counters[subject] = counters.get(subject, -1) + 1
        result.append(Recording(subject, f'{counters[subject]:02d}',
                                [Frame(fid, pts, sk) for _, fid, pts, sk in group]))
    return result


def convert(source, segmenter, num_points, seed):
    """Segment and resample every frame; frames with no human keep the previous cloud"""
    frames, previous, empty = [], None, 0
    for i, (frame_id, depth, skeleton) in enumerate(source):
        try:
            cloud = segmenter.segment_depth(depth)
            cloud = resample(cloud, num_points, [seed, i])
        except EmptySceneError:
            empty += 1
            if previous is None:
                continue
            cloud = previous
        previous = cloud
        frames.append((frame_id, cloud.points, skeleton))
        if (i + 1) % 1000 == 0:
            print(f"   ✓ {i + 1} frames processed")
    return frames, empty


@click.command()
@click.option('--depth', 'depth_path', required=True,
              help='ITOP depth-map .h5 file, or a folder of depth PNGs')
@click.option('--labels', 'labels_path', required=True,
              help='ITOP labels .h5 file, or a native labels file for PNG folders')
@click.option('--out', required=True, help='Output directory (native layout)')
@click.option('--points', type=int, default=4096, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--png-scale', type=float, default=0.001, show_default=True,
              help='Meters per PNG depth unit')
def main(depth_path, labels_path, out, points, seed, png_scale):
    """Convert ITOP front-view data to the native dataset layout"""
    create_runtime(os.environ.get('SPIKE_ENV', 'default'))
    print("Converting ITOP data...")

    try:
        if os.path.isdir(depth_path):
            source = read_png_folder(depth_path, labels_path, png_scale)
        else:
            source = read_h5(depth_path, labels_path)

        segmenter = HumanSegmenter(SegmentationConfig())
        frames, empty = convert(source, segmenter, points, seed)
        if not frames:
            raise DataError('no frame contained a human', path=depth_path)
        print(f"✓ Segmented {len(frames)} frames ({empty} without a human)")

        dataset = SequenceDataset(split_recordings(frames), ITOP_TEST_SUBJECTS)
        save_native(dataset, out)
        print(f"✓ Wrote {len(dataset.recordings)} recordings to {out}")
        return 0

    except SpikeError as e:
        print(f"❌ Conversion failed: {e}")
        traceback.print_exc()
        sys.exit(e.exit_code)


if __name__ == '__main__':
    main()
