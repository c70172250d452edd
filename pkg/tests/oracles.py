"""Independent reference implementations used only by the tests.

The rules oracle builds every valid set constructively (joker-free groups
and runs, then every way of swapping up to two tiles for jokers) instead of
checking a candidate against predicates the way ``rummi.rules`` does.
"""

import functools
import itertools
import math

import numpy as np

from rummi import JOKER, Color, SetKind, Tile
from rummi.clustering import DetectionBox

COLORS = list(Color)


def _with_jokers(tiles):
    k = len(tiles)
    for r in range(3):
        for spots in itertools.combinations(range(k), r):
            yield tuple(JOKER if i in spots else t for i, t in enumerate(tiles))


@functools.lru_cache(maxsize=None)
def valid_sets(k):
    """Map every valid k-tuple of identities to the set of kinds it can be read as."""
    kinds = {}

    def add(tiles, kind):
        for variant in _with_jokers(tiles):
            kinds.setdefault(variant, set()).add(kind)

    if k in (3, 4):
        for n in range(1, 14):
            for colors in itertools.permutations(COLORS, k):
                add(tuple(Tile(n, c) for c in colors), SetKind.GROUP)
    if 3 <= k <= 13:
        for c in COLORS:
            for start in range(1, 14 - k + 1):
                run = tuple(Tile(start + i, c) for i in range(k))
                add(run, SetKind.RUN_FORWARD)
                add(run[::-1], SetKind.RUN_REVERSE)
    return kinds


PRECEDENCE = (SetKind.GROUP, SetKind.RUN_FORWARD, SetKind.RUN_REVERSE)


def expected_kind(tiles):
    kinds = valid_sets(len(tiles)).get(tuple(tiles))
    if not kinds:
        return None
    return next(k for k in PRECEDENCE if k in kinds)


def line_layout(rng, n_sets, sizes, jitter=0.1, separation=4.0, spacing=1.05,
                angle_jitter_deg=3.0, width=None):
    """Boxes for ``n_sets`` straight lines of tiles plus the true membership.

    Rotation of each line is uniform in [0, 180) degrees, center jitter is
    uniform within +-``jitter`` tile widths on both axes, and tiles of
    different lines are at least ``separation`` widths apart.
    """
    width = width if width is not None else float(rng.uniform(20, 120))
    height = width * 1.4
    boxes, truth, placed = [], [], np.empty((0, 2))
    next_id = 0
    for _ in range(n_sets):
        k = int(rng.integers(sizes[0], sizes[1] + 1))
        theta = float(rng.uniform(0, math.pi))
        u = np.array([math.cos(theta), math.sin(theta)])
        v = np.array([-u[1], u[0]])
        along = (np.arange(k) * spacing + rng.uniform(-jitter, jitter, k)) * width
        across = rng.uniform(-jitter, jitter, k) * width
        local = along[:, None] * u + across[:, None] * v
        radius = 10.0 * width * (n_sets + 3)
        for attempt in range(100_000):
            centers = local + rng.uniform(-radius, radius, 2) * (1 + attempt / 500)
            if not len(placed):
                break
            gaps = np.linalg.norm(centers[:, None] - placed[None], axis=2)
            if gaps.min() >= separation * width:
                break
        ids = []
        for (x, y) in centers:
            angle = theta + math.radians(rng.uniform(-angle_jitter_deg, angle_jitter_deg))
            boxes.append(DetectionBox(next_id, float(x), float(y), width, height, angle))
            ids.append(next_id)
            next_id += 1
        truth.append(ids)
        placed = np.vstack([placed, centers])
    order = rng.permutation(len(boxes))
    return [boxes[i] for i in order], truth


def random_matrix_arrays(rng, k, jokers=True):
    """Scores with a random overall scale and a mix of ties, zeros and spikes."""
    scale = float(10.0 ** rng.uniform(-3, 3))
    color = rng.random((k, 4))
    number = rng.random((k, 13))
    joker = rng.random(k) * rng.uniform(0, 2.5) if jokers else np.zeros(k)
    style = rng.integers(4)
    if style == 1:  # coarse values: many exact ties
        color, number, joker = (np.round(a * 4) / 4 for a in (color, number, joker))
    elif style == 2:  # peaked rows
        color = color ** 6
        number = number ** 6
    elif style == 3:  # normalized like softmax outputs
        color = color / color.sum(axis=1, keepdims=True)
        number = number / number.sum(axis=1, keepdims=True)
    return color * scale, number * scale, joker * scale


def optimum_is_unique(m, best_score):
    """True when exactly one valid labeling reaches ``best_score``."""
    from rummi import score

    hits = 0
    for tiles in valid_sets(m.tile_count):
        if score(tiles, m) == best_score:
            hits += 1
            if hits > 1:
                return False
    return hits == 1
