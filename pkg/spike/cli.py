"""
Command-line interface: train, eval, predict, ablate, bench and synth.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

import functools
import logging
import os
import sys

import click

from spike import create_runtime
from spike.errors import ConfigError, DataError, SpikeError
from spike.utils.runconfig import SOURCE_DEFAULT, RunConfig, parse_overrides

logger = logging.getLogger(__name__)

DATA_FORMATS = ('native', 'itop')
EVAL_REPORT_NAME = 'eval_report.txt'
ABLATION_REPORT_NAME = 'ablation.txt'


class CommandError(click.ClickException):
    """SpikeError surfaced to the shell with its exit code"""

    def __init__(self, error):
        super().__init__(str(error))
        self.exit_code = getattr(error, 'exit_code', 1)


def handle_errors(f):
    """Turn pipeline errors into click exceptions carrying the right exit code"""
    @functools.wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except SpikeError as e:
            logger.debug('Command failed', exc_info=True)
            raise CommandError(e) from e
        except OSError as e:
            raise CommandError(DataError(str(e), path=getattr(e, 'filename', None))) from e
    return decorated_function


def common_options(f):
    """--config, --data, --checkpoint, --seed, --out and repeated --set key=value"""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                     help='key=value configuration file'),
        click.option('--data', help='Dataset directory (native layout)'),
        click.option('--checkpoint', help='Checkpoint file'),
        click.option('--seed', type=int, help='Random seed'),
        click.option('--out', help='Output directory'),
        click.option('--set', 'assignments', multiple=True, metavar='KEY=VALUE',
                     help='Override any configuration key'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def resolve_run(runtime, config_path, data, checkpoint, seed, out, assignments, **flags):
    """Flags over the config file over the runtime dtype over defaults"""
    overrides = parse_overrides(assignments)
    for key, value in dict(data=data, checkpoint=checkpoint, seed=seed, out=out, **flags).items():
        if value is not None:
            overrides[key] = value
    return RunConfig.resolve(config_path, overrides).with_environment(dtype=runtime.dtype)


def out_dir(run, runtime):
    path = run['out'] or runtime.config.OUT_DIR
    os.makedirs(path, exist_ok=True)
    return path


def load_dataset(run, num_joints=None):
    """Dataset at --data; every frame must carry `num_joints` (default: configured M)"""
    from spike.data import load_itop, load_native

    path = run['data']
    if not path:
        raise ConfigError('data', 'no dataset directory given (use --data)')
    if not os.path.isdir(path):
        raise ConfigError('data', f'dataset directory not found: {path}')
    if run['format'] not in DATA_FORMATS:
        raise ConfigError('format', f'expected one of {DATA_FORMATS}, got {run["format"]!r}')
    dataset = load_itop(path) if run['format'] == 'itop' else load_native(path)

    expected = num_joints or run.hp.num_joints
    joints = {f.skeleton.num_joints for rec in dataset.recordings for f in rec.frames}
    if joints != {expected}:
        raise ConfigError('num_joints', f'dataset has {sorted(joints)} joints per frame, '
                                        f'model expects {expected}')
    return dataset


def load_model(run, runtime):
    """Checkpoint parameters and HyperParams, checked against explicitly set keys"""
    from spike.network import load_checkpoint

    path = run['checkpoint']
    if not path:
        raise ConfigError('checkpoint', 'no checkpoint given (use --checkpoint)')
    params, hp = load_checkpoint(path, dtype=run['dtype'])
    for key in hp.diff(run.hp):
        if run.sources[key] != SOURCE_DEFAULT:
            raise ConfigError(key, f'checkpoint has {getattr(hp, key)!r}, '
                                   f'configuration sets {getattr(run.hp, key)!r}')
    return params, hp


def progress_enabled(runtime):
    return runtime.config.PROGRESS_BARS and sys.stderr.isatty()


@click.group()
@click.pass_context
def cli(ctx):
    """SPiKE: 3D human pose from point cloud sequences"""
    try:
        ctx.obj = create_runtime(os.environ.get('SPIKE_ENV', 'default'))
    except SpikeError as e:
        raise CommandError(e) from e


@cli.command()
@common_options
@click.option('--epochs', type=int, help='Number of epochs')
@click.option('--resume', is_flag=True, help='Continue from train_state.spk in --out')
@click.pass_obj
@handle_errors
def train(runtime, resume, **options):
    """Train a model and write checkpoints, the log and the resolved config"""
    from spike.training import BEST_NAME, train as run_training

    run = resolve_run(runtime, **options)
    dataset = load_dataset(run)
    out = out_dir(run, runtime)
    run.dump(os.path.join(out, runtime.config.RESOLVED_CONFIG_NAME))

    cfg = run.train.replace(workers=runtime.worker_cap(run.train.workers))
    result = run_training(dataset, run.hp, cfg, out, resume=resume, threshold=run['threshold'],
                          progress=progress_enabled(runtime))
    for record in result.records:
        click.echo(record.to_line())
    click.echo(f'✓ Trained {len(result.records)} epochs; best checkpoint '
               f'{os.path.join(out, BEST_NAME)}')


@cli.command(name='eval')
@common_options
@click.option('--threshold', type=float, help='Distance threshold in meters')
@click.option('--split', type=click.Choice(['test', 'train', 'all']), default='test',
              show_default=True)
@click.option('--plot-dir', type=click.Path(file_okay=False),
              help='Write ground truth / prediction plots here')
@click.option('--plot-count', type=int, default=8, show_default=True)
@click.pass_obj
@handle_errors
def evaluate_command(runtime, split, plot_dir, plot_count, **options):
    """mAP report in table order, to stdout and the output directory"""
    from spike.evaluation import evaluate

    run = resolve_run(runtime, **options)
    params, hp = load_model(run, runtime)
    dataset = load_dataset(run, hp.num_joints)
    subset = dataset.subset(split)
    if not len(subset):
        logger.warning('Split %r is empty, evaluating every frame', split)
        subset = dataset

    report, predictions = evaluate(subset, hp, params, run.train.seed, run['threshold'])
    text = report.to_table() + '\n\n' + '\n'.join(report.to_lines()) + '\n'
    click.echo(text, nl=False)
    with open(os.path.join(out_dir(run, runtime), EVAL_REPORT_NAME), 'w') as fh:
        fh.write(text)

    if plot_dir:
        from spike.utils.plotting import save_pose_plot

        os.makedirs(plot_dir, exist_ok=True)
        for index, joints, target in list(zip(predictions.indices, predictions.joints,
                                              predictions.targets))[:plot_count]:
            frame_id = subset.frame(index).frame_id
            save_pose_plot(os.path.join(plot_dir, f'{frame_id}.svg'), joints, target, frame_id)


def _sequence_clouds(paths, hp, frame, seg):
    """T clouds from a recording directory, point files or depth PNGs; plus the target"""
    from spike.data import load_recording, read_points, window_positions
    from spike.preprocess import HumanSegmenter, load_depth_image

    if len(paths) == 1 and os.path.isdir(paths[0]):
        rec = load_recording(paths[0])
        ids = [f.frame_id for f in rec.frames]
        if frame is not None and frame not in ids:
            raise DataError(f'frame {frame} not in recording', path=paths[0])
        t = ids.index(frame) if frame is not None else len(ids) - 1
        positions = window_positions(t, hp.seq_len, len(rec), hp.window_mode)
        return [rec.frames[p].points for p in positions], rec.frames[t].skeleton

    clouds = []
    segmenter = HumanSegmenter(seg)
    for path in paths:
        if path.lower().endswith('.png'):
            clouds.append(segmenter.segment_depth(load_depth_image(path)).points)
        else:
            clouds.append(read_points(path))
    return clouds, None


@cli.command()
@common_options
@click.argument('sequence', nargs=-1, required=True)
@click.option('--frame', help='Target frame id (recording directories; default: last frame)')
@click.option('--plot', type=click.Path(dir_okay=False), help='Write a skeleton plot (.svg/.png)')
@click.pass_obj
@handle_errors
def predict(runtime, sequence, frame, plot, **options):
    """Print the predicted joints (meters, sensor frame), one joint per line"""
    from spike.evaluation import predict_clouds

    run = resolve_run(runtime, **options)
    params, hp = load_model(run, runtime)
    clouds, target = _sequence_clouds(list(sequence), hp, frame, run.seg)
    pose, _, _ = predict_clouds(clouds, hp, params, run.train.seed)
    for line in pose.to_lines():
        click.echo(line)

    if plot:
        from spike.utils.plotting import save_pose_plot
        save_pose_plot(plot, pose.joints, target)


@cli.command()
@common_options
@click.option('--kernels', default='3', show_default=True,
              help='Comma-separated temporal kernels for the spatio-temporal cells')
@click.option('--seq-lens', default='1,2,3,4', show_default=True)
@click.pass_obj
@handle_errors
def ablate(runtime, kernels, seq_lens, **options):
    """Train/evaluate over T × window mode × convolution; report mAP and peak memory"""
    from spike.evaluation import format_grid, run_ablation

    try:
        kernel_list = tuple(int(k) for k in kernels.split(',') if k.strip())
        lens = tuple(int(t) for t in seq_lens.split(',') if t.strip())
    except ValueError as e:
        raise ConfigError('kernels', f'expected comma-separated integers: {e}') from e

    run = resolve_run(runtime, **options)
    dataset = load_dataset(run)
    out = out_dir(run, runtime)
    run.dump(os.path.join(out, runtime.config.RESOLVED_CONFIG_NAME))

    cfg = run.train.replace(workers=runtime.worker_cap(run.train.workers))
    cells = run_ablation(dataset, run.hp, cfg, kernel_list, run['threshold'], lens,
                         progress=lambda cell: click.echo(cell.to_line()))
    table = format_grid(cells)
    click.echo(table)
    with open(os.path.join(out, ABLATION_REPORT_NAME), 'w') as fh:
        fh.write(table + '\n' + '\n'.join(c.to_line() for c in cells) + '\n')


@cli.command()
@common_options
@click.option('--warmup', type=int, help='Untimed iterations')
@click.option('--iters', type=int, help='Timed iterations')
@click.pass_obj
@handle_errors
def bench(runtime, **options):
    """Median / p95 per-frame inference latency"""
    from spike.data import window
    from spike.evaluation import benchmark_inference
    from spike.network import SpikeModel
    from spike.preprocess import center_sequence

    run = resolve_run(runtime, **options)
    params, hp = load_model(run, runtime)
    dataset = load_dataset(run, hp.num_joints)

    # Windows are loaded and centred up front so timing excludes disk I/O
    indices = dataset.eval_indices()[:8]
    if not indices:
        raise DataError('no labelled frames to benchmark', path=run['data'])
    sequences = []
    for index in indices:
        seq, _ = window(dataset, index, hp.seq_len, hp.window_mode, hp.num_points, run.train.seed)
        sequences.append(center_sequence(seq)[0])

    model = SpikeModel(hp, params)
    report = benchmark_inference(model, sequences, run['warmup'], run['iters'], run.train.seed)
    click.echo(report.to_line())


@cli.command()
@click.option('--out', required=True, help='Directory for the native dataset')
@click.option('--sequences', type=int, default=50, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--frames', type=int, help='Frames per sequence')
@click.option('--points', type=int, help='Points per frame')
@click.option('--noise', type=float, help='Gaussian noise sigma (m)')
@click.option('--occlusion', type=click.Choice(['none', 'hide-arm-current-frame']))
@click.option('--hidden-arm', type=click.Choice(['l', 'r']))
@click.pass_obj
@handle_errors
def synth(runtime, out, sequences, seed, frames, points, noise, occlusion, hidden_arm):
    """Write a synthetic articulated-rig dataset in the native layout"""
    from spike.data import SyntheticRigConfig, generate_synthetic, save_native

    changes = dict(frames_per_sequence=frames, points_per_frame=points, noise_sigma=noise,
                   occlusion=occlusion, hidden_arm=hidden_arm)
    rig = SyntheticRigConfig(**{k: v for k, v in changes.items() if v is not None})
    dataset = generate_synthetic(rig, sequences, seed)
    save_native(dataset, out)
    click.echo(f'✓ Wrote {len(dataset.recordings)} sequences ({len(dataset)} frames) to {out}')


def main():
    cli(prog_name='spike')
