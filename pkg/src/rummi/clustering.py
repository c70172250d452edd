"""Group tile detections into sets and order each set along its line.

Two boxes are linked when their centers are within ``gap_factor`` mean tile
widths of each other and the line joining them runs along both boxes' width
axes (within ``angle_tol``). Sets are the connected components of that
relation. Everything is measured in tile widths, which makes the result
independent of image scale and set orientation.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet


def _wrap_angle(angle: float) -> float:
    """Map a line orientation onto (-pi/2, pi/2]."""
    a = math.fmod(angle, math.pi)
    if a <= -math.pi / 2:
        a += math.pi
    elif a > math.pi / 2:
        a -= math.pi
    return a


@dataclass(frozen=True)
class DetectionBox:
    """Oriented tile box.

    ``width`` is measured along the direction ``angle`` (radians), which for
    tiles lying side by side is the direction of the set.
    """

    id: Hashable
    cx: float
    cy: float
    width: float
    height: float
    angle: float = 0.0

    def __post_init__(self):
        for name in ("cx", "cy", "width", "height", "angle"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"box {self.id!r}: {name} is not finite")
            object.__setattr__(self, name, value)
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"box {self.id!r}: width and height must be positive")
        object.__setattr__(self, "angle", _wrap_angle(self.angle))

    @property
    def center(self) -> tuple:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class ClusterConfig:
    gap_factor: float = 1.8
    angle_tol: float = math.radians(25.0)


@dataclass(frozen=True)
class Cluster:
    members: tuple
    axis: tuple
    spacing: float

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class ClusterScore:
    exact_match: float
    rand_index: float
    n_truth: int
    n_recovered: int


class IdMismatch(ValueError):
    pass


def id_key(tile_id):
    """Sort key for opaque tile ids of possibly mixed types."""
    return (type(tile_id).__name__, tile_id)


def _adjacency(boxes: Sequence[DetectionBox], cfg: ClusterConfig) -> np.ndarray:
    xy = np.array([b.center for b in boxes])
    widths = np.array([b.width for b in boxes])
    axes = np.array([[math.cos(b.angle), math.sin(b.angle)] for b in boxes])

    delta = xy[None, :, :] - xy[:, None, :]
    dist = np.linalg.norm(delta, axis=2)
    reach = cfg.gap_factor * (widths[:, None] + widths[None, :]) / 2
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = delta / dist[:, :, None]
    # |cos| of the angle between the joining line and each box's width axis
    cos_a = np.abs(np.einsum("ijk,ik->ij", unit, axes))
    cos_b = np.abs(np.einsum("ijk,jk->ij", unit, axes))
    min_cos = math.cos(cfg.angle_tol)
    aligned = (cos_a >= min_cos) & (cos_b >= min_cos)
    aligned |= dist == 0
    return (dist <= reach) & aligned


def _principal_axis(boxes: Sequence[DetectionBox]) -> np.ndarray:
    if len(boxes) == 1:
        axis = np.array([math.cos(boxes[0].angle), math.sin(boxes[0].angle)])
    else:
        xy = np.array([b.center for b in boxes])
        xy = xy - xy.mean(axis=0)
        _, vecs = np.linalg.eigh(xy.T @ xy)
        axis = vecs[:, -1]
    # fixed sign: point into the right half-plane (upwards when vertical)
    if axis[0] < -1e-12 or (abs(axis[0]) <= 1e-12 and axis[1] < 0):
        axis = -axis
    return axis / np.linalg.norm(axis)


def _make_cluster(boxes: Sequence[DetectionBox]) -> Cluster:
    boxes = sorted(boxes, key=lambda b: id_key(b.id))
    axis = _principal_axis(boxes)
    proj = [float(np.dot(b.center, axis)) for b in boxes]
    order = sorted(range(len(boxes)), key=lambda i: (proj[i], id_key(boxes[i].id)))
    members = tuple(boxes[i].id for i in order)
    if len(boxes) > 1:
        gaps = [proj[order[i + 1]] - proj[order[i]] for i in range(len(order) - 1)]
        spacing = statistics.median(gaps) / statistics.median(b.width for b in boxes)
    else:
        spacing = 0.0
    return Cluster(members=members, axis=(float(axis[0]), float(axis[1])), spacing=spacing)


def cluster_tiles(boxes: Sequence[DetectionBox], cfg: ClusterConfig = ClusterConfig()) -> list:
    """Partition ``boxes`` into ordered clusters, one per detected set.

    Clusters come back sorted by their smallest member id, so the output
    does not depend on input order.
    """
    if not boxes:
        return []
    ids = [b.id for b in boxes]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate box ids")
    adj = _adjacency(boxes, cfg)
    components = DisjointSet(range(len(boxes)))
    for i, j in zip(*np.nonzero(np.triu(adj, k=1))):
        components.merge(int(i), int(j))
    clusters = [_make_cluster([boxes[i] for i in subset]) for subset in components.subsets()]
    return sorted(clusters, key=lambda c: min(id_key(m) for m in c.members))


def _labels(groups, universe_name) -> dict:
    labels = {}
    for g, members in enumerate(groups):
        for tile_id in members:
            if tile_id in labels:
                raise IdMismatch(f"tile {tile_id!r} appears twice in {universe_name}")
            labels[tile_id] = g
    return labels


def cluster_metrics(predicted: Sequence[Cluster], truth: Sequence[Sequence]) -> ClusterScore:
    """Exact set recovery rate and pairwise Rand index against ground truth."""
    pred_labels = _labels([c.members for c in predicted], "prediction")
    true_labels = _labels(truth, "truth")
    if pred_labels.keys() != true_labels.keys():
        missing = set(true_labels) ^ set(pred_labels)
        raise IdMismatch(f"tile ids differ between prediction and truth: {sorted(missing, key=id_key)!r}")

    predicted_sets = {frozenset(c.members) for c in predicted}
    recovered = sum(1 for members in truth if frozenset(members) in predicted_sets)

    ids = sorted(true_labels, key=id_key)
    p = np.array([pred_labels[i] for i in ids])
    t = np.array([true_labels[i] for i in ids])
    n = len(ids)
    if n < 2:
        rand = 1.0
    else:
        same_p = p[:, None] == p[None, :]
        same_t = t[:, None] == t[None, :]
        agree = np.triu(same_p == same_t, k=1).sum()
        rand = float(agree) / (n * (n - 1) / 2)
    return ClusterScore(
        exact_match=recovered / len(truth) if truth else 1.0,
        rand_index=rand,
        n_truth=len(truth),
        n_recovered=recovered,
    )
