import os

import numpy as np
import pytest

from spike.errors import ConfigError
from spike.models import SkeletonFrame
from spike.utils.plotting import plot_format, save_pose_plot


def test_plot_format_follows_extension():
    assert plot_format('pose.svg') == 'svg'
    assert plot_format('pose.PNG') == 'png'
    with pytest.raises(ConfigError):
        plot_format('pose.gif')


@pytest.mark.parametrize('name', ['pose.svg', 'pose.png'])
def test_save_pose_plot_writes_file(workdir, name):
    rng = np.random.default_rng(0)
    truth = SkeletonFrame(rng.normal(size=(15, 3)), np.ones(15, dtype=bool))
    path = os.path.join(workdir, name)
    save_pose_plot(path, truth.joints + 0.05, truth, title='00_00001')
    assert os.path.getsize(path) > 0
    if name.endswith('.svg'):
        with open(path) as fh:
            assert '<svg' in fh.read()


def test_save_pose_plot_without_ground_truth(workdir):
    path = os.path.join(workdir, 'pred.svg')
    save_pose_plot(path, np.zeros((15, 3)))
    assert os.path.exists(path)
