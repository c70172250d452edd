"""Simulated game states, synthetic classifier noise, and accuracy sweeps.

A sweep draws ground-truth boards, turns them into confidence matrices whose
informativeness is set by a quality knob ``q`` in [0, 1], and compares the
per-tile argmax pipeline against cluster-then-correct. The same boards and
the same noise draws are reused at every quality level, so differences
between levels come from ``q`` alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, astuple, dataclass, field
from typing import Sequence

import numpy as np

from .clustering import ClusterConfig, DetectionBox, cluster_tiles
from .core import (
    JOKER,
    MAX_JOKERS,
    N_COLORS,
    N_IDENTITIES,
    N_NUMBERS,
    Color,
    ConfidenceMatrix,
    Tile,
)
from .corrector import correct_set, raw_argmax
from .rules import is_valid_set

PIPELINES = ("raw", "corrected")
METRICS = ("tile_accuracy", "set_accuracy", "image_accuracy")
DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))
JOKER_SCALE = 2.0
DEFAULT_CONCENTRATION = 5.0


class UnsatisfiableParams(ValueError):
    pass


class IdMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    """Knobs for the board generator. Lengths are in tile widths unless noted."""

    n_sets: tuple = (1, 4)
    set_size: tuple = (3, 13)
    joker_prob: float = 0.02
    max_jokers: int = MAX_JOKERS
    tile_width: float = 40.0  # pixels
    scale_range: tuple = (0.5, 2.0)
    aspect: float = 1.35
    spacing: float = 1.05
    jitter: float = 0.05
    angle_jitter_deg: float = 3.0
    separation: float = 4.0

    def check(self):
        lo, hi = self.n_sets
        if not 1 <= lo <= hi:
            raise UnsatisfiableParams(f"set count range {self.n_sets} is empty or below 1")
        lo, hi = self.set_size
        if not 3 <= lo <= hi <= N_NUMBERS:
            raise UnsatisfiableParams(f"set size range {self.set_size} not within 3..{N_NUMBERS}")
        if not 0 <= self.joker_prob <= 1:
            raise UnsatisfiableParams("joker_prob must lie in [0, 1]")
        if not 0 <= self.max_jokers <= MAX_JOKERS:
            raise UnsatisfiableParams(f"the game has only {MAX_JOKERS} jokers")
        if self.jitter < 0 or self.spacing <= 0 or self.separation <= 0 or self.tile_width <= 0:
            raise UnsatisfiableParams("geometry parameters must be positive")
        if not 0 < self.scale_range[0] <= self.scale_range[1]:
            raise UnsatisfiableParams("scale_range must be positive and ordered")


@dataclass(frozen=True)
class NoiseParams:
    quality: float
    concentration: float = DEFAULT_CONCENTRATION
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.quality <= 1:
            raise ValueError(f"quality {self.quality} outside [0, 1]")
        if not self.concentration > 0:
            raise ValueError("concentration must be positive")


@dataclass(frozen=True)
class GroundTruthState:
    sets: tuple  # tuple of tuples of TileIdentity, spatial order
    set_ids: tuple  # matching tile ids
    layout: tuple  # DetectionBox per tile
    seed: int

    @property
    def identities(self) -> dict:
        return {i: t for ids, tiles in zip(self.set_ids, self.sets) for i, t in zip(ids, tiles)}

    @property
    def tile_count(self) -> int:
        return sum(len(s) for s in self.sets)


def _rng(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(e) for e in entropy]))


def _sample_set(rng: np.random.Generator, params: GenParams) -> list:
    lo, hi = params.set_size
    group_sizes = [k for k in (3, 4) if lo <= k <= hi]
    if group_sizes and rng.random() < 0.5:
        k = int(rng.choice(group_sizes))
        n = int(rng.integers(1, N_NUMBERS + 1))
        colors = rng.permutation(N_COLORS)[:k]
        return [Tile(n, Color(int(c))) for c in colors]
    k = int(rng.integers(lo, hi + 1))
    color = Color(int(rng.integers(N_COLORS)))
    start = int(rng.integers(1, N_NUMBERS - k + 2))
    tiles = [Tile(start + i, color) for i in range(k)]
    if rng.random() < 0.5:
        tiles.reverse()
    return tiles


def _place_line(rng, k, width, params: GenParams):
    theta = rng.uniform(0, math.pi)
    u = np.array([math.cos(theta), math.sin(theta)])
    v = np.array([-u[1], u[0]])
    offsets = (np.arange(k) - (k - 1) / 2) * params.spacing * width
    jitter = rng.uniform(-params.jitter, params.jitter, size=(k, 2)) * width
    centers = offsets[:, None] * u + jitter[:, :1] * u + jitter[:, 1:] * v
    angles = theta + np.radians(rng.uniform(-params.angle_jitter_deg, params.angle_jitter_deg, size=k))
    return centers, angles


def _layout(rng, sizes, params: GenParams) -> list:
    width = params.tile_width * rng.uniform(*params.scale_range)
    placed = []  # list of (centers, angles)
    all_centers = np.empty((0, 2))
    extent = sum(sizes) * params.spacing * width + len(sizes) * params.separation * width
    for k in sizes:
        centers, angles = _place_line(rng, k, width, params)
        for attempt in range(10_000):
            # widen the canvas slowly when it is crowded
            half = extent * (1 + attempt / 200)
            shift = rng.uniform(-half, half, size=2)
            cand = centers + shift
            if len(all_centers) == 0:
                break
            d = np.linalg.norm(cand[:, None, :] - all_centers[None, :, :], axis=2)
            if d.min() >= params.separation * width:
                break
        else:
            raise UnsatisfiableParams("could not place sets without overlap")
        placed.append((cand, angles))
        all_centers = np.vstack([all_centers, cand])
    return [(c, a, width) for c, a in placed]


def generate_state(params: GenParams, seed: int) -> GroundTruthState:
    """Draw a board of valid sets with a consistent tile layout; deterministic in ``seed``."""
    params.check()
    rng = _rng(seed)
    n_sets = int(rng.integers(params.n_sets[0], params.n_sets[1] + 1))
    sets = [_sample_set(rng, params) for _ in range(n_sets)]

    jokers = 0
    for tiles in sets:
        for i in range(len(tiles)):
            if rng.random() < params.joker_prob and jokers < params.max_jokers:
                tiles[i] = JOKER
                jokers += 1

    lines = _layout(rng, [len(s) for s in sets], params)
    set_ids = []
    boxes = []
    next_id = 0
    for tiles, (centers, angles, width) in zip(sets, lines):
        ids = []
        for (cx, cy), angle in zip(centers, angles):
            ids.append(next_id)
            boxes.append(DetectionBox(next_id, float(cx), float(cy), width,
                                      width * params.aspect, float(angle)))
            next_id += 1
        set_ids.append(tuple(ids))
    order = rng.permutation(len(boxes))
    return GroundTruthState(
        sets=tuple(tuple(s) for s in sets),
        set_ids=tuple(set_ids),
        layout=tuple(boxes[i] for i in order),
        seed=seed,
    )


def corrupt(truth: GroundTruthState, noise: NoiseParams) -> list:
    """Synthetic classifier output: one ConfidenceMatrix per ground-truth set.

    Each channel is ``q * one_hot + (1 - q) * Dirichlet(concentration)``.
    The joker channel keeps the joker's share of a draw over all 53
    identities, so at ``q = 0`` a joker is about as likely as any single
    regular identity. A joker has no true color or number, so its color and
    number targets are uniform. The joker score stands in for a color
    score plus a number score, so it is reported on that two-unit scale.
    """
    rng = _rng(noise.seed)
    q, alpha = noise.quality, noise.concentration
    n = truth.tile_count
    color_noise = rng.dirichlet([alpha] * N_COLORS, size=n)
    number_noise = rng.dirichlet([alpha] * N_NUMBERS, size=n)
    joker_noise = rng.dirichlet([alpha] * N_IDENTITIES, size=n)[:, -1]

    out = []
    row = 0
    for tiles in truth.sets:
        k = len(tiles)
        color = np.empty((k, N_COLORS))
        number = np.empty((k, N_NUMBERS))
        joker = np.empty(k)
        for t, tile in enumerate(tiles):
            if tile.is_joker:
                color_hot = np.full(N_COLORS, 1 / N_COLORS)
                number_hot = np.full(N_NUMBERS, 1 / N_NUMBERS)
                joker_hot = 1.0
            else:
                color_hot = np.eye(N_COLORS)[tile.color]
                number_hot = np.eye(N_NUMBERS)[tile.number - 1]
                joker_hot = 0.0
            color[t] = q * color_hot + (1 - q) * color_noise[row]
            number[t] = q * number_hot + (1 - q) * number_noise[row]
            joker[t] = JOKER_SCALE * (q * joker_hot + (1 - q) * joker_noise[row])
            row += 1
        out.append(ConfidenceMatrix(color, number, joker))
    return out


def gather(truth: GroundTruthState, matrices: Sequence[ConfidenceMatrix], ids: Sequence) -> ConfidenceMatrix:
    """Assemble the rows for ``ids`` (in that order) from per-set matrices."""
    where = {}
    for s, set_ids in enumerate(truth.set_ids):
        for t, tile_id in enumerate(set_ids):
            where[tile_id] = (s, t)
    rows = [where[i] for i in ids]
    return ConfidenceMatrix(
        np.array([matrices[s].color_conf[t] for s, t in rows]).reshape(len(rows), N_COLORS),
        np.array([matrices[s].number_conf[t] for s, t in rows]).reshape(len(rows), N_NUMBERS),
        np.array([matrices[s].joker_conf[t] for s, t in rows]),
    )


@dataclass(frozen=True)
class Metrics:
    tiles: int = 0
    tiles_correct: int = 0
    sets: int = 0
    sets_correct: int = 0
    images: int = 0
    images_correct: int = 0

    @property
    def tile_accuracy(self) -> float:
        return self.tiles_correct / self.tiles if self.tiles else 1.0

    @property
    def set_accuracy(self) -> float:
        return self.sets_correct / self.sets if self.sets else 1.0

    @property
    def image_accuracy(self) -> float:
        return self.images_correct / self.images if self.images else 1.0

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(*(a + b for a, b in zip(astuple(self), astuple(other))))


def evaluate(truth: GroundTruthState, predictions: dict, cluster_output) -> Metrics:
    """Score one image.

    A set counts as correct when all its tiles are right and clustering
    returned exactly its members; the image is correct when every set is.
    """
    expected = truth.identities
    if set(predictions) != set(expected):
        raise IdMismatch("predictions do not cover exactly the image's tiles")
    clustered = {frozenset(c.members) for c in cluster_output}
    tiles_correct = sum(1 for i, t in expected.items() if predictions[i] == t)
    sets_correct = 0
    for ids in truth.set_ids:
        if frozenset(ids) in clustered and all(predictions[i] == expected[i] for i in ids):
            sets_correct += 1
    n_sets = len(truth.set_ids)
    return Metrics(
        tiles=len(expected),
        tiles_correct=tiles_correct,
        sets=n_sets,
        sets_correct=sets_correct,
        images=1,
        images_correct=int(sets_correct == n_sets),
    )


def predict_raw(truth: GroundTruthState, matrices) -> dict:
    ids = [i for set_ids in truth.set_ids for i in set_ids]
    return dict(zip(ids, raw_argmax(gather(truth, matrices, ids))))


def predict_corrected(truth: GroundTruthState, matrices, clusters) -> dict:
    """Correct every cluster that can form a set; others keep the raw argmax."""
    predictions = {}
    for cluster in clusters:
        m = gather(truth, matrices, cluster.members)
        if 3 <= len(cluster) <= N_NUMBERS:
            labels = correct_set(m).identities
        else:
            labels = raw_argmax(m)
        predictions.update(zip(cluster.members, labels))
    return predictions


@dataclass(frozen=True)
class SweepConfig:
    grid: tuple = DEFAULT_GRID
    n_seeds: int = 10
    n_images: int = 20
    master_seed: int = 0
    concentration: float = DEFAULT_CONCENTRATION
    gen: GenParams = field(default_factory=GenParams)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)


def _run_cell(cfg: SweepConfig, level: int, seed_index: int) -> dict:
    q = cfg.grid[level]
    totals = {p: Metrics() for p in PIPELINES}
    invalid_sets = 0
    for image in range(cfg.n_images):
        truth = generate_state(cfg.gen, _seed(cfg.master_seed, seed_index, image, 0))
        noise = NoiseParams(q, cfg.concentration, _seed(cfg.master_seed, seed_index, image, 1))
        matrices = corrupt(truth, noise)
        clusters = cluster_tiles(truth.layout, cfg.cluster)
        raw = predict_raw(truth, matrices)
        fixed = predict_corrected(truth, matrices, clusters)
        for c in clusters:
            if 3 <= len(c) <= N_NUMBERS and is_valid_set([fixed[i] for i in c.members]) is None:
                invalid_sets += 1
        totals["raw"] += evaluate(truth, raw, clusters)
        totals["corrected"] += evaluate(truth, fixed, clusters)
    return {
        "quality": q,
        "seed": seed_index,
        "invalid_corrected_sets": invalid_sets,
        **{p: asdict(m) for p, m in totals.items()},
    }


def _seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("RUMMI_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SweepRow:
    quality: float
    pipeline: str
    n_seeds: int
    tile_accuracy_mean: float
    tile_accuracy_std: float
    set_accuracy_mean: float
    set_accuracy_std: float
    image_accuracy_mean: float
    image_accuracy_std: float


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    cells: tuple  # per (quality, seed) raw counts

    def row(self, quality: float, pipeline: str) -> SweepRow:
        for r in self.rows:
            if r.pipeline == pipeline and math.isclose(r.quality, quality):
                return r
        raise KeyError((quality, pipeline))

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(SweepRow.__dataclass_fields__)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for r in self.rows:
            writer.writerow([_fmt(getattr(r, n)) for n in names])
        return buf.getvalue()

    def to_jsonl(self) -> str:
        return "".join(json.dumps(c, sort_keys=True) + "\n" for c in self.cells)


def _fmt(value):
    return f"{value:.6f}" if isinstance(value, float) else value


def sweep(cfg: SweepConfig = SweepConfig()) -> SweepReport:
    """Run every quality level x seed cell and reduce to mean/std rows.

    Cells are independent; ``RUMMI_THREADS`` > 1 spreads them over worker
    processes. Results are reduced in (level, seed) order either way.
    """
    if cfg.n_seeds < 2:
        raise ValueError("need at least two seeds for a standard deviation")
    cfg.gen.check()
    jobs = [(level, s) for level in range(len(cfg.grid)) for s in range(cfg.n_seeds)]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, cfg, level, s) for level, s in jobs]
            cells = [f.result() for f in futures]
    else:
        cells = [_run_cell(cfg, level, s) for level, s in jobs]

    rows = []
    for level, q in enumerate(cfg.grid):
        mine = cells[level * cfg.n_seeds:(level + 1) * cfg.n_seeds]
        for pipeline in PIPELINES:
            per_seed = [Metrics(**c[pipeline]) for c in mine]
            stats = {}
            for name in METRICS:
                values = [getattr(m, name) for m in per_seed]
                stats[f"{name}_mean"] = statistics.fmean(values)
                stats[f"{name}_std"] = statistics.stdev(values)
            rows.append(SweepRow(quality=q, pipeline=pipeline, n_seeds=cfg.n_seeds, **stats))
    return SweepReport(rows=tuple(rows), cells=tuple(cells))


def dominance_summary(report: SweepReport) -> list:
    """One line per quality level comparing corrected against raw image accuracy."""
    lines = []
    levels = sorted({r.quality for r in report.rows})
    for q in levels:
        raw, fixed = report.row(q, "raw"), report.row(q, "corrected")
        gap = fixed.image_accuracy_mean - raw.image_accuracy_mean
        mark = ">=" if gap >= 0 else "<"
        lines.append(
            f"q={q:.2f}  raw {raw.image_accuracy_mean:6.1%} ± {raw.image_accuracy_std:5.1%}  "
            f"corrected {fixed.image_accuracy_mean:6.1%} ± {fixed.image_accuracy_std:5.1%}  "
            f"({mark} raw by {gap * 100:+.1f} pp)"
        )
    return lines

