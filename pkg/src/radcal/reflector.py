"""Corner-reflector extraction from a raw 4D radar frame.

Pipeline per frame: threshold filtering on range / Doppler / RCS, DBSCAN
clustering of the surviving Cartesian points, selection of the cluster
with the highest mean RCS, and localization at its strongest return.

All steps are deterministic: filtering preserves input order, DBSCAN seeds
clusters in ascending point index, and every tie-break is fixed (mean-RCS
tie -> smaller mean range; max-RCS tie -> lowest index).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import SphericalReturn, sph2cart

__all__ = [
    "ReflectorNotFound",
    "EmptyAfterFilter",
    "NoClusters",
    "RadarFrame",
    "FilterParams",
    "ClusterParams",
    "Cluster",
    "filter_returns",
    "dbscan",
    "select_corner_cluster",
    "locate_center",
    "extract_reflector",
]


class ReflectorNotFound(Exception):
    """No reflector could be localized in this frame; skip the pose."""


class EmptyAfterFilter(ReflectorNotFound):
    """Threshold filtering removed every return."""


class NoClusters(ReflectorNotFound):
    """DBSCAN marked every filtered return as noise."""


@dataclass(frozen=True)
class RadarFrame:
    """One radar scan: a timestamp and its returns (spherical)."""

    timestamp_s: float
    returns: tuple[SphericalReturn, ...]

    def __post_init__(self):
        object.__setattr__(self, "returns", tuple(self.returns))


@dataclass(frozen=True)
class FilterParams:
    """Static-reflector gates: working range, Doppler bound, RCS floor."""

    r_min: float = 3.0
    r_max: float = 15.0
    v_th: float = 0.5
    rho_min: float = 10.0

    def __post_init__(self):
        if not (0 <= self.r_min < self.r_max):
            raise ValueError(f"need 0 <= r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.v_th <= 0:
            raise ValueError("v_th must be positive")


@dataclass(frozen=True)
class ClusterParams:
    """DBSCAN neighborhood radius (meters) and core-point threshold."""

    eps: float = 0.3
    min_pts: int = 3

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


@dataclass
class Cluster:
    """One DBSCAN cluster: member indices plus cached summary statistics."""

    indices: tuple[int, ...]
    centroid: np.ndarray = field(repr=False)
    mean_range: float
    mean_rcs: float | None = None

    def __len__(self) -> int:
        return len(self.indices)


def filter_returns(
    frame: RadarFrame, params: FilterParams
) -> list[SphericalReturn]:
    """Keep returns with r_min <= R <= r_max, |v| < v_th, rcs > rho_min.

    Range bounds are inclusive; the Doppler and RCS gates are strict.
    Order is preserved.  Raises EmptyAfterFilter when nothing survives.
    """
    kept = [
        r
        for r in frame.returns
        if params.r_min <= r.range_m <= params.r_max
        and abs(r.velocity_mps) < params.v_th
        and r.rcs_dbsm > params.rho_min
    ]
    if not kept:
        raise EmptyAfterFilter(
            f"all {len(frame.returns)} returns at t={frame.timestamp_s} filtered out"
        )
    return kept


def _dbscan_labels(
    neighbors: list[np.ndarray], min_pts: int
) -> tuple[np.ndarray, int]:
    """Sequential DBSCAN given per-point sorted neighbor lists (self included).

    Clusters are seeded in ascending index order and grown breadth-first,
    so a border point reachable from several clusters always joins the one
    seeded first.
    """
    n = len(neighbors)
    core = np.array([len(nb) >= min_pts for nb in neighbors])
    labels = np.full(n, -1, dtype=int)
    cluster_id = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        labels[i] = cluster_id
        queue = deque([i])
        while queue:
            j = queue.popleft()
            for k in neighbors[j]:
                if labels[k] == -1:
                    labels[k] = cluster_id
                    if core[k]:
                        queue.append(k)
        cluster_id += 1
    return labels, cluster_id


def dbscan(
    points: np.ndarray, params: ClusterParams
) -> tuple[list[Cluster], list[int]]:
    """Cluster 3D points with DBSCAN (Euclidean metric).

    Returns ``(clusters, noise_indices)``.  Every point lands in exactly
    one cluster or in the noise list; each cluster contains at least one
    core point (a point with >= min_pts neighbors within eps, itself
    included).
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(points)
    if n == 0:
        return [], []
    tree = cKDTree(points)
    neighbors = [
        np.sort(np.asarray(nb, dtype=int))
        for nb in tree.query_ball_point(points, params.eps)
    ]
    labels, n_clusters = _dbscan_labels(neighbors, params.min_pts)
    clusters = []
    for cid in range(n_clusters):
        idx = np.flatnonzero(labels == cid)
        members = points[idx]
        clusters.append(
            Cluster(
                indices=tuple(int(i) for i in idx),
                centroid=members.mean(axis=0),
                mean_range=float(np.linalg.norm(members, axis=1).mean()),
            )
        )
    noise = [int(i) for i in np.flatnonzero(labels == -1)]
    return clusters, noise


def select_corner_cluster(
    clusters: list[Cluster], rcs: np.ndarray
) -> Cluster:
    """Pick the cluster with maximum mean RCS; ties go to smaller mean range.

    ``rcs`` holds the per-point RCS, indexed like the clustered points.
    """
    if not clusters:
        raise NoClusters("no clusters to select from")
    rcs = np.asarray(rcs, dtype=float)
    best = None
    for cluster in clusters:
        cluster.mean_rcs = float(rcs[list(cluster.indices)].mean())
        if (
            best is None
            or cluster.mean_rcs > best.mean_rcs
            or (cluster.mean_rcs == best.mean_rcs and cluster.mean_range < best.mean_range)
        ):
            best = cluster
    return best


def locate_center(
    cluster: Cluster, returns: list[SphericalReturn]
) -> tuple[int, np.ndarray]:
    """Strongest return in the cluster; ties go to the lowest index.

    Returns ``(index, position)`` where the position comes from sph2cart
    of the selected return.
    """
    best_idx = max(
        cluster.indices, key=lambda i: (returns[i].rcs_dbsm, -i)
    )
    return best_idx, sph2cart(returns[best_idx])


def extract_reflector(
    frame: RadarFrame,
    filter_params: FilterParams | None = None,
    cluster_params: ClusterParams | None = None,
) -> np.ndarray:
    """Full per-frame extraction: filter, cluster, select, localize.

    Returns the reflector center in the radar frame.  Raises
    ReflectorNotFound (EmptyAfterFilter / NoClusters) when the frame holds
    no usable reflector; callers log and skip the pose.
    """
    filter_params = filter_params or FilterParams()
    cluster_params = cluster_params or ClusterParams()
    kept = filter_returns(frame, filter_params)
    xyz = np.array([sph2cart(r) for r in kept])
    clusters, _ = dbscan(xyz, cluster_params)
    if not clusters:
        raise NoClusters(
            f"all {len(kept)} filtered returns are DBSCAN noise at t={frame.timestamp_s}"
        )
    rcs = np.array([r.rcs_dbsm for r in kept])
    corner = select_corner_cluster(clusters, rcs)
    _, center = locate_center(corner, kept)
    return center
