import os
from types import SimpleNamespace

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

import convert_itop
from spike.data import load_itop
from spike.data.native import format_label
from spike.errors import DataError
from spike.models import Frame, NUM_JOINTS, SkeletonFrame
from spike.preprocess import depth_to_points


def skeleton():
    return SkeletonFrame(np.zeros((NUM_JOINTS, 3)), np.ones(NUM_JOINTS, dtype=bool))


def test_split_recordings_breaks_on_gaps_and_subjects():
    frames = [(fid, np.zeros((2, 3)), skeleton())
              for fid in ('03_00000', '03_00001', '03_00005', '04_00006')]
    recordings = convert_itop.split_recordings(frames)
    assert [(r.subject, r.recording, len(r)) for r in recordings] == \
        [('03', '00', 2), ('03', '01', 1), ('04', '00', 1)]


def test_png_folder_conversion(tmp_path):
    depth_dir = tmp_path / 'depth'
    depth_dir.mkdir()
    labels = []
    for k in range(3):
        raw = np.zeros((240, 320), dtype=np.uint16)
        raw[100:140, 150:170] = 2500
        frame_id = f'03_{k:05d}'
        Image.fromarray(raw).save(depth_dir / f'{frame_id}.png')
        labels.append(format_label(Frame(frame_id, np.zeros((1, 3)), skeleton())))
    labels_path = tmp_path / 'labels.txt'
    labels_path.write_text('\n'.join(labels) + '\n')

    out = str(tmp_path / 'itop')
    result = CliRunner().invoke(convert_itop.main, [
        '--depth', str(depth_dir), '--labels', str(labels_path), '--out', out,
        '--points', '32'])
    assert result.exit_code == 0, result.output
    assert '✓ Wrote 1 recordings' in result.output

    dataset = load_itop(out)
    assert len(dataset) == 3
    assert dataset.split_of('03') == 'test'
    assert all(f.points.shape == (32, 3) for f in dataset.recordings[0].frames)
    assert np.allclose(dataset.frame(0).points[:, 2], 2.5, atol=1e-6)


def test_png_without_label_fails(tmp_path):
    depth_dir = tmp_path / 'depth'
    depth_dir.mkdir()
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(depth_dir / '05_00000.png')
    labels_path = tmp_path / 'labels.txt'
    labels_path.write_text('')
    with pytest.raises(DataError):
        list(convert_itop.read_png_folder(str(depth_dir), str(labels_path), 0.001))


def test_h5_input_requires_h5py(monkeypatch):
    monkeypatch.setattr(convert_itop, 'h5py', None)
    with pytest.raises(DataError) as info:
        next(convert_itop.read_h5('depth.h5', 'labels.h5'))
    assert 'h5py' in str(info.value)


class FakeH5File(dict):
    """In-memory stand-in for an open h5py.File"""

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_h5_labels_share_the_frame_of_back_projected_points(monkeypatch):
    v, u, z = 60, 200, 2.0
    depth = np.zeros((1, 240, 320))
    depth[0, v, u] = z
    # ITOP world coordinates of that pixel: x right, y up, z away from the camera
    world = np.array([(u - 160) * 0.0035 * z, -(v - 120) * 0.0035 * z, z])
    files = {
        'depth.h5': FakeH5File(id=np.array([b'00_00000']), data=depth),
        'labels.h5': FakeH5File(id=np.array([b'00_00000']), is_valid=np.array([1]),
                                real_world_coordinates=np.tile(world, (1, NUM_JOINTS, 1))),
    }
    monkeypatch.setattr(convert_itop, 'h5py',
                        SimpleNamespace(File=lambda path, mode: files[path]))

    frame_id, depth_frame, labels = next(convert_itop.read_h5('depth.h5', 'labels.h5'))
    assert frame_id == '00_00000'
    assert labels.valid.all()
    point = depth_to_points(depth_frame).points[0]
    assert point[1] < 0
    assert np.allclose(labels.joints[0], point, atol=1e-4)
