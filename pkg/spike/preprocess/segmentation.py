"""
Human isolation: floor removal, DBSCAN clustering and cluster selection.

The chain applied to each back-projected frame is
threshold_background → remove_floor → dbscan → select_human.
"""

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from spike.errors import EmptySceneError
from spike.models import PointCloud, SegmentationConfig
from spike.preprocess.depth import depth_to_points, threshold_background

logger = logging.getLogger(__name__)

NOISE = -1
_UNVISITED = -2


def remove_floor(pc, cfg):
    """Drop points in the floor-most `floor_bins_discard` bins of the y histogram"""
    if pc.is_empty:
        raise EmptySceneError('remove_floor: empty point cloud')

    y = pc.points[:, 1]
    lo, hi = y.min(), y.max()
    if hi <= lo:
        # No vertical extent, nothing can be told apart as floor
        return PointCloud(pc.points.copy())

    bins = cfg.histogram_bins
    width = (hi - lo) / bins
    index = np.minimum(((y - lo) / width).astype(np.int64), bins - 1)

    # Camera y points down, so the floor sits at the largest y by default
    if cfg.floor_side == 'max':
        keep = index < bins - cfg.floor_bins_discard
    else:
        keep = index >= cfg.floor_bins_discard
    return PointCloud(pc.points[keep])


@dataclass
class Clustering:
    """DBSCAN result: one label per point, clusters as index arrays, noise"""

    labels: np.ndarray
    clusters: list
    noise: np.ndarray

    @property
    def num_clusters(self):
        return len(self.clusters)


def dbscan(pc, cfg):
    """
    Density clustering with eps = dbscan_eps_m and minPts = dbscan_min_pts.

    A point is core when its closed eps-ball (itself included) holds at least
    minPts points. Clusters are numbered in order of their first core point;
    a border point belongs to the first cluster that reaches it.
    """
    n = len(pc)
    labels = np.full(n, _UNVISITED, dtype=np.int64)
    if n == 0:
        return Clustering(np.full(0, NOISE, dtype=np.int64), [], np.zeros(0, dtype=np.int64))

    tree = cKDTree(pc.points)
    neighborhoods = [sorted(nb) for nb in tree.query_ball_point(pc.points, r=cfg.dbscan_eps_m)]
    core = np.array([len(nb) >= cfg.dbscan_min_pts for nb in neighborhoods])

    cluster = -1
    for i in range(n):
        if labels[i] != _UNVISITED:
            continue
        if not core[i]:
            labels[i] = NOISE
            continue

        cluster += 1
        labels[i] = cluster
        queue = deque(neighborhoods[i])
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster
            if labels[j] != _UNVISITED:
                continue
            labels[j] = cluster
            if core[j]:
                queue.extend(neighborhoods[j])

    clusters = [np.flatnonzero(labels == c) for c in range(cluster + 1)]
    return Clustering(labels, clusters, np.flatnonzero(labels == NOISE))


def _overlaps(lo_a, hi_a, lo_b, hi_b, margin):
    return lo_a <= hi_b + margin and hi_a >= lo_b - margin


def keeps_cluster(largest, candidate, sensor_origin, offset):
    """
    Box predicate deciding whether `candidate` belongs with `largest`.

    Both arguments are (lo, hi) corner pairs of axis-aligned bounding boxes.
    A candidate is kept when it is
      - below or above: its x/z footprint overlaps the largest cluster's,
        expanded by `offset`;
      - between the largest cluster and the sensor: it overlaps in x and y
        (expanded by `offset`) and its depth range lies from the sensor up to
        the far side of the largest cluster plus `offset`.
    """
    (lo, hi), (clo, chi) = largest, candidate
    stacked = (_overlaps(clo[0], chi[0], lo[0], hi[0], offset)
               and _overlaps(clo[2], chi[2], lo[2], hi[2], offset))
    if stacked:
        return True

    facing = (_overlaps(clo[0], chi[0], lo[0], hi[0], offset)
              and _overlaps(clo[1], chi[1], lo[1], hi[1], offset))
    in_front = clo[2] >= sensor_origin[2] - offset and chi[2] <= hi[2] + offset
    return facing and in_front


def select_human(clusters, sensor_origin=(0.0, 0.0, 0.0), cfg=None):
    """Union of the largest cluster with the clusters stacked on it or in front of it"""
    cfg = cfg or SegmentationConfig()
    clouds = [c.points if isinstance(c, PointCloud) else np.asarray(c, dtype=np.float64)
              for c in clusters]
    clouds = [c for c in clouds if len(c)]
    if not clouds:
        raise EmptySceneError('select_human: no clusters in scene')

    sensor_origin = np.asarray(sensor_origin, dtype=np.float64)
    # np.argmax picks the first of equally large clusters
    main = int(np.argmax([len(c) for c in clouds]))
    box = (clouds[main].min(axis=0), clouds[main].max(axis=0))

    chosen = [clouds[main]]
    for i, cloud in enumerate(clouds):
        if i == main:
            continue
        if keeps_cluster(box, (cloud.min(axis=0), cloud.max(axis=0)),
                         sensor_origin, cfg.cluster_offset_m):
            chosen.append(cloud)

    logger.debug('select_human: kept %d of %d clusters', len(chosen), len(clouds))
    return PointCloud(np.concatenate(chosen, axis=0))


class HumanSegmenter:
    """Runs the full isolation chain with one SegmentationConfig"""

    def __init__(self, cfg=None, sensor_origin=(0.0, 0.0, 0.0)):
        self.cfg = cfg or SegmentationConfig()
        self.sensor_origin = np.asarray(sensor_origin, dtype=np.float64)

    def segment(self, pc):
        """Human-only cloud from a raw camera-space cloud"""
        pc = threshold_background(pc, self.cfg)
        if pc.is_empty:
            raise EmptySceneError('no points in front of the depth threshold')
        pc = remove_floor(pc, self.cfg)
        clustering = dbscan(pc, self.cfg)
        clusters = [pc.points[idx] for idx in clustering.clusters]
        return select_human(clusters, self.sensor_origin, self.cfg)

    def segment_depth(self, frame):
        return self.segment(depth_to_points(frame))
