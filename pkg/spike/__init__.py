"""
SPiKE: 3D human keypoint regression from point-cloud sequences.

`create_runtime` is the process entry point shared by the CLI and the
scripts; it resolves the environment configuration and sets up logging.
"""

from dataclasses import dataclass

from spike.utils.log import configure_logging

__version__ = '0.1.0'


@dataclass(frozen=True)
class Runtime:
    """Environment-level settings for one process"""

    name: str
    config: type
    threads: int
    dtype: str

    def worker_cap(self, requested):
        """Workers actually used: `requested`, capped by SPIKE_THREADS"""
        return max(1, min(int(requested), self.threads))


def create_runtime(config_name='default'):
    """Runtime factory pattern"""
    from config import config

    if config_name not in config:
        from spike.errors import ConfigError
        raise ConfigError('SPIKE_ENV', f'unknown environment {config_name!r} '
                                       f'(expected one of {sorted(config)})')
    cfg = config[config_name]
    configure_logging(cfg.LOG_LEVEL)

    runtime = Runtime(name=config_name, config=cfg, threads=cfg.THREADS, dtype=cfg.DTYPE)
    cfg.init_runtime(runtime)
    return runtime
