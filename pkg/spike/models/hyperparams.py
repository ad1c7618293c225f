"""Validated configuration records for the network, training and segmentation"""

from dataclasses import asdict, dataclass, fields, replace

from spike.errors import ConfigError

WINDOW_MODES = ('past', 'past-future')
CONV_MODES = ('spatial', 'st')
FLOOR_SIDES = ('max', 'min')


class RecordMixin:
    """Shared dict conversion / copy helpers for config records"""

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        for key in values:
            if key not in known:
                raise ConfigError(key, f'unknown {cls.__name__} field')
        return cls(**values)

    def replace(self, **changes):
        return replace(self, **changes)


def _positive(record, *names):
    for name in names:
        value = getattr(record, name)
        if value <= 0:
            raise ConfigError(name, f'must be positive, got {value}')


@dataclass(frozen=True)
class HyperParams(RecordMixin):
    """
    Every architectural symbol of the network in one record.

    seq_len=T, num_points=N, num_volumes=N_v, num_samples=N_s, radius=r,
    channels=C, channels_prime=C', channels_k=C_k, channels_v=C_v,
    heads=h, blocks=m, num_joints=M, temporal_kernel=k_t.
    C', C_k and C_v fall back to C when left at 0.
    """

    seq_len: int = 3
    num_points: int = 4096
    num_volumes: int = 128
    num_samples: int = 32
    radius: float = 0.2
    channels: int = 1024
    channels_prime: int = 0
    channels_k: int = 0
    channels_v: int = 0
    heads: int = 8
    blocks: int = 5
    num_joints: int = 15
    temporal_kernel: int = 1
    window_mode: str = 'past'
    conv_mode: str = 'spatial'

    def __post_init__(self):
        _positive(self, 'seq_len', 'num_points', 'num_volumes', 'num_samples',
                  'radius', 'channels', 'heads', 'blocks', 'num_joints',
                  'temporal_kernel')
        for name in ('channels_prime', 'channels_k', 'channels_v'):
            if getattr(self, name) < 0:
                raise ConfigError(name, 'must be positive (or 0 for the default)')
        if self.c_k % self.heads:
            raise ConfigError('channels_k', f'{self.c_k} is not divisible by heads={self.heads}')
        if self.c_v % self.heads:
            raise ConfigError('channels_v', f'{self.c_v} is not divisible by heads={self.heads}')
        if self.temporal_kernel % 2 == 0:
            raise ConfigError('temporal_kernel', f'must be odd, got {self.temporal_kernel}')
        if self.conv_mode == 'st' and self.temporal_kernel > self.seq_len:
            raise ConfigError('temporal_kernel',
                              f'{self.temporal_kernel} exceeds seq_len={self.seq_len}')
        if self.window_mode not in WINDOW_MODES:
            raise ConfigError('window_mode', f'expected one of {WINDOW_MODES}')
        if self.conv_mode not in CONV_MODES:
            raise ConfigError('conv_mode', f'expected one of {CONV_MODES}')
        if self.channels < 2:
            raise ConfigError('channels', 'the regression head needs at least 2 channels')

    @property
    def c_prime(self):
        return self.channels_prime or self.channels

    @property
    def c_k(self):
        return self.channels_k or self.channels

    @property
    def c_v(self):
        return self.channels_v or self.channels

    @property
    def head_dim_k(self):
        return self.c_k // self.heads

    @property
    def head_dim_v(self):
        return self.c_v // self.heads

    @property
    def num_tokens(self):
        return self.seq_len * self.num_volumes

    def diff(self, other):
        """Names of fields whose values differ from `other`"""
        return [f.name for f in fields(self) if getattr(self, f.name) != getattr(other, f.name)]


@dataclass(frozen=True)
class TrainConfig(RecordMixin):
    """Optimisation settings; window_mode lives on HyperParams"""

    batch_size: int = 24
    learning_rate: float = 0.01
    momentum: float = 0.9
    epochs: int = 150
    seed: int = 0
    augment: bool = True
    checkpoint_every: int = 10
    val_fraction: float = 0.1
    workers: int = 1
    dtype: str = 'float32'

    def __post_init__(self):
        _positive(self, 'batch_size', 'learning_rate', 'epochs', 'checkpoint_every', 'workers')
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError('momentum', f'must lie in [0, 1), got {self.momentum}')
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError('val_fraction', f'must lie in [0, 1), got {self.val_fraction}')
        if self.dtype not in ('float32', 'float64'):
            raise ConfigError('dtype', f'expected float32 or float64, got {self.dtype}')


@dataclass(frozen=True)
class SegmentationConfig(RecordMixin):
    """Human isolation settings for depth-derived clouds"""

    depth_threshold_m: float = 4.0
    floor_bins_discard: int = 10
    histogram_bins: int = 100
    dbscan_eps_m: float = 0.15
    dbscan_min_pts: int = 10
    cluster_offset_m: float = 0.20
    floor_side: str = 'max'

    def __post_init__(self):
        _positive(self, 'depth_threshold_m', 'histogram_bins', 'dbscan_eps_m',
                  'dbscan_min_pts', 'cluster_offset_m')
        if not 0 <= self.floor_bins_discard < self.histogram_bins:
            raise ConfigError('floor_bins_discard',
                              f'must lie in [0, histogram_bins={self.histogram_bins})')
        if self.floor_side not in FLOOR_SIDES:
            raise ConfigError('floor_side', f'expected one of {FLOOR_SIDES}')
