"""Depth frames, point clouds, sequences and tokenized local volumes"""

from dataclasses import dataclass, field

import numpy as np

from spike.errors import ConfigError, DataError


@dataclass
class DepthFrame:
    """Per-pixel range image in meters (0 = invalid) with pinhole intrinsics"""

    depth: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        self.depth = np.asarray(self.depth, dtype=np.float64)
        if self.depth.ndim != 2:
            raise DataError(f'depth map must be 2-D, got {self.depth.shape}')
        if np.any(self.depth < 0) or not np.all(np.isfinite(self.depth)):
            raise DataError('depth values must be finite and non-negative')
        if self.fx <= 0:
            raise ConfigError('fx', f'focal length must be positive, got {self.fx}')
        if self.fy <= 0:
            raise ConfigError('fy', f'focal length must be positive, got {self.fy}')

    @property
    def height(self):
        return self.depth.shape[0]

    @property
    def width(self):
        return self.depth.shape[1]


@dataclass
class PointCloud:
    """Unordered (x, y, z) points in camera coordinates, meters"""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise DataError('point coordinates must be finite')

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f'<PointCloud n={len(self)}>'

    @property
    def is_empty(self):
        return len(self) == 0


@dataclass
class PointCloudSequence:
    """T frames of exactly N points each plus integer frame timestamps"""

    frames: np.ndarray
    timestamps: np.ndarray = None

    def __post_init__(self):
        if isinstance(self.frames, (list, tuple)):
            sizes = {len(PointCloud(f)) for f in self.frames}
            if len(sizes) > 1:
                raise DataError(f'frames differ in point count: {sorted(sizes)}')
            self.frames = np.stack([PointCloud(f).points for f in self.frames])
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[2] != 3:
            raise DataError(f'sequence must be T×N×3, got {self.frames.shape}')
        if self.timestamps is None:
            self.timestamps = np.arange(self.frames.shape[0])
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        if self.timestamps.shape != (self.frames.shape[0],):
            raise DataError('one timestamp per frame required')
        if np.any(np.diff(self.timestamps) <= 0):
            raise DataError('timestamps must be strictly increasing')

    def __len__(self):
        return self.frames.shape[0]

    def __repr__(self):
        return f'<PointCloudSequence T={self.num_frames} N={self.num_points}>'

    @property
    def num_frames(self):
        return self.frames.shape[0]

    @property
    def num_points(self):
        return self.frames.shape[1]

    def frame(self, t):
        return PointCloud(self.frames[t])


@dataclass
class LocalVolume:
    """Reference point (x, y, z, t) and the displacements of its neighbours"""

    reference: np.ndarray
    displacements: np.ndarray

    @property
    def num_samples(self):
        return self.displacements.shape[0]


@dataclass
class TokenBatch:
    """
    T·N_v local volumes in frame-major order.

    `references` is (T·N_v)×4 holding (x, y, z, t); `displacements` is
    (T·N_v)×S×D with D = 3 for spatial volumes and D = 4 (δx, δy, δz, δt)
    for spatio-temporal ones.
    """

    references: np.ndarray
    displacements: np.ndarray
    num_volumes: int = field(default=0)

    def __post_init__(self):
        self.references = np.asarray(self.references, dtype=np.float64)
        self.displacements = np.asarray(self.displacements, dtype=np.float64)
        if self.references.shape[0] != self.displacements.shape[0]:
            raise DataError(f'{self.references.shape[0]} references but '
                            f'{self.displacements.shape[0]} volumes')

    def __len__(self):
        return self.references.shape[0]

    def __repr__(self):
        return f'<TokenBatch tokens={len(self)} samples={self.displacements.shape[1]}>'

    @property
    def num_frames(self):
        if not self.num_volumes:
            return 1
        return len(self) // self.num_volumes

    def volumes(self):
        for ref, disp in zip(self.references, self.displacements):
            yield LocalVolume(ref, disp)

    def permuted(self, order):
        order = np.asarray(order, dtype=np.intp)
        return TokenBatch(self.references[order], self.displacements[order], self.num_volumes)

    def canonical_order(self):
        """
        Lexicographic order on (t, x, y, z, displacements).

        Putting tokens in this order before the network makes every
        reduction over tokens independent of how the rows were produced.
        """
        flat = self.displacements.reshape(len(self), -1)
        keys = [flat[:, j] for j in range(flat.shape[1] - 1, -1, -1)]
        keys += [self.references[:, 2], self.references[:, 1],
                 self.references[:, 0], self.references[:, 3]]
        return np.lexsort(keys)

    def canonical(self):
        return self.permuted(self.canonical_order())
