import os

import pytest
from click.testing import CliRunner

from spike.cli import CommandError, cli
from spike.errors import DimensionError

TOY = ['--set', 'channels=16', '--set', 'heads=2', '--set', 'blocks=1',
       '--set', 'num_volumes=8', '--set', 'num_samples=4', '--set', 'num_points=64',
       '--set', 'seq_len=2', '--set', 'radius=0.3']
TRAIN = ['--set', 'batch_size=4', '--set', 'val_fraction=0', '--set', 'augment=false',
         '--set', 'checkpoint_every=1']


@pytest.fixture(scope='module')
def runner():
    return CliRunner()


@pytest.fixture(scope='module')
def trained(runner, tmp_path_factory):
    root = tmp_path_factory.mktemp('cli')
    data, out = str(root / 'data'), str(root / 'run')
    result = runner.invoke(cli, ['synth', '--out', data, '--sequences', '3', '--frames', '3',
                                 '--points', '64', '--seed', '1'])
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli, ['train', '--data', data, '--out', out, '--epochs', '1']
                           + TOY + TRAIN)
    assert result.exit_code == 0, result.output
    return data, out, result


def test_synth_writes_native_dataset(trained):
    data, _, _ = trained
    assert sorted(os.listdir(data)) == ['00_00', '01_00', '02_00', 'dataset.txt']


def test_train_prints_epoch_lines_and_dumps_config(trained):
    _, out, result = trained
    assert 'epoch=1 loss=' in result.output
    assert '✓ Trained 1 epochs' in result.output
    with open(os.path.join(out, 'resolved_config.txt')) as fh:
        text = fh.read()
    assert 'channels=16  # flag' in text
    assert 'epochs=1  # flag' in text
    assert 'dtype=float64  # env' in text
    assert os.path.exists(os.path.join(out, 'best.spk'))


def test_eval_falls_back_to_all_frames_and_writes_report(runner, trained, tmp_path):
    data, out, _ = trained
    plots = str(tmp_path / 'plots')
    result = runner.invoke(cli, ['eval', '--data', data, '--out', str(tmp_path),
                                 '--checkpoint', os.path.join(out, 'best.spk'),
                                 '--plot-dir', plots, '--plot-count', '2'])
    assert result.exit_code == 0, result.output
    assert 'mean_ap=' in result.output
    assert 'mAP@0.10m' in result.output.splitlines()
    assert os.path.exists(tmp_path / 'eval_report.txt')
    assert len(os.listdir(plots)) == 2


def test_eval_rejects_conflicting_hyperparameters(runner, trained, tmp_path):
    data, out, _ = trained
    result = runner.invoke(cli, ['eval', '--data', data, '--out', str(tmp_path),
                                 '--checkpoint', os.path.join(out, 'best.spk'),
                                 '--set', 'channels=32'])
    assert result.exit_code == 2
    assert 'channels' in result.output


def test_predict_prints_one_line_per_joint(runner, trained, tmp_path):
    data, out, _ = trained
    plot = str(tmp_path / 'pose.svg')
    result = runner.invoke(cli, ['predict', '--checkpoint', os.path.join(out, 'best.spk'),
                                 '--plot', plot, os.path.join(data, '01_00')])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert len(lines) == 15
    assert all(len(line.split()) == 3 for line in lines)
    assert os.path.exists(plot)


def test_bench_reports_latency(runner, trained, tmp_path):
    data, out, _ = trained
    result = runner.invoke(cli, ['bench', '--data', data, '--out', str(tmp_path),
                                 '--checkpoint', os.path.join(out, 'best.spk'),
                                 '--warmup', '0', '--iters', '3'])
    assert result.exit_code == 0, result.output
    assert 'median_ms=' in result.output


def test_missing_dataset_exits_with_config_error(runner, tmp_path):
    missing = str(tmp_path / 'nowhere')
    result = runner.invoke(cli, ['train', '--data', missing, '--out', str(tmp_path)])
    assert result.exit_code == 2
    assert missing in result.output


def test_corrupt_checkpoint_exits_with_data_error(runner, trained, tmp_path):
    data, _, _ = trained
    broken = tmp_path / 'broken.spk'
    broken.write_bytes(b'SPIK\x01\x00')
    result = runner.invoke(cli, ['eval', '--data', data, '--out', str(tmp_path),
                                 '--checkpoint', str(broken)])
    assert result.exit_code == 3


def test_config_file_and_unknown_keys(runner, trained, tmp_path):
    data, _, _ = trained
    cfg = tmp_path / 'run.cfg'
    cfg.write_text('colour=blue\n')
    result = runner.invoke(cli, ['train', '--data', data, '--config', str(cfg)])
    assert result.exit_code == 2
    assert 'colour' in result.output


def test_ablate_small_grid(runner, trained, tmp_path):
    data, _, _ = trained
    result = runner.invoke(cli, ['ablate', '--data', data, '--out', str(tmp_path),
                                 '--seq-lens', '1', '--kernels', '3', '--set', 'epochs=1']
                           + TOY + TRAIN)
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'ablation.txt') as fh:
        lines = fh.read().splitlines()
    assert len([line for line in lines if line.startswith('seq_len=')]) == 4


def test_unknown_environment_exits_with_config_error(tmp_path):
    result = CliRunner().invoke(cli, ['synth', '--out', str(tmp_path)],
                                env={'SPIKE_ENV': 'staging'})
    assert result.exit_code == 2
    assert 'SPIKE_ENV' in result.output
    assert 'Traceback' not in result.output


def test_shape_mismatch_exits_as_data_error():
    error = CommandError(DimensionError('matmul', (2, 3), (4, 5)))
    assert error.exit_code == 3
    assert 'matmul' in error.format_message()
