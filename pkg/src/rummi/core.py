"""Value types shared across the package: colors, tiles, confidence matrices."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

N_COLORS = 4
N_NUMBERS = 13
N_IDENTITIES = N_COLORS * N_NUMBERS + 1
JOKER_INDEX = N_IDENTITIES - 1
MAX_JOKERS = 2


class Color(enum.IntEnum):
    """Tile colors. The integer value is the canonical rank."""

    RED = 0
    BLUE = 1
    BLACK = 2
    YELLOW = 3

    @classmethod
    def parse(cls, name: str) -> "Color":
        key = name.strip().lower()
        if key == "orange":
            key = "yellow"
        try:
            return cls[key.upper()]
        except KeyError:
            raise ValueError(f"unknown color {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@functools.total_ordering
@dataclass(frozen=True)
class Tile:
    """A regular tile: a number in 1..13 and a color."""

    number: int
    color: Color

    def __post_init__(self):
        if isinstance(self.number, bool) or not isinstance(self.number, (int, np.integer)):
            raise TypeError(f"tile number must be an int, got {self.number!r}")
        if not 1 <= self.number <= N_NUMBERS:
            raise ValueError(f"tile number {self.number} outside 1..{N_NUMBERS}")
        object.__setattr__(self, "number", int(self.number))
        object.__setattr__(self, "color", Color(self.color))

    is_joker = False

    @property
    def index(self) -> int:
        return (self.number - 1) * N_COLORS + int(self.color)

    def __lt__(self, other):
        if not isinstance(other, (Tile, Joker)):
            return NotImplemented
        return self.index < other.index

    def __str__(self):
        return f"{self.number}-{self.color.label}"


@functools.total_ordering
@dataclass(frozen=True)
class Joker:
    """The wildcard tile. Sorts after every regular tile."""

    is_joker = True

    @property
    def index(self) -> int:
        return JOKER_INDEX

    def __lt__(self, other):
        if not isinstance(other, (Tile, Joker)):
            return NotImplemented
        return self.index < other.index

    def __str__(self):
        return "joker"


JOKER = Joker()

TileIdentity = Union[Tile, Joker]


def canonical_index(tile: TileIdentity) -> int:
    """Position of ``tile`` in the canonical order, 0..52."""
    return tile.index


@functools.lru_cache(maxsize=None)
def _all_identities() -> tuple:
    regular = tuple(Tile(n, c) for n in range(1, N_NUMBERS + 1) for c in Color)
    return regular + (JOKER,)


def identity_from_index(index: int) -> TileIdentity:
    if not 0 <= index < N_IDENTITIES:
        raise ValueError(f"identity index {index} outside 0..{N_IDENTITIES - 1}")
    return _all_identities()[index]


def all_identities() -> tuple:
    """Every tile identity, in canonical order."""
    return _all_identities()


def parse_identity(token) -> TileIdentity:
    """Parse ``"7-red"``, ``"joker"``, ``[7, "red"]`` or ``{"number": 7, "color": "red"}``."""
    if isinstance(token, str):
        text = token.strip().lower()
        if text in ("joker", "j"):
            return JOKER
        num, sep, col = text.partition("-")
        if not sep:
            raise ValueError(f"cannot parse tile {token!r}")
        return Tile(int(num), Color.parse(col))
    if isinstance(token, dict):
        if token.get("joker"):
            return JOKER
        return Tile(int(token["number"]), Color.parse(token["color"]))
    if isinstance(token, (list, tuple)) and len(token) == 2:
        return Tile(int(token[0]), Color.parse(token[1]))
    raise ValueError(f"cannot parse tile {token!r}")


class InvalidMatrix(ValueError):
    """Base class for confidence-matrix validation failures."""


class NegativeScore(InvalidMatrix):
    pass


class NonFiniteScore(InvalidMatrix):
    pass


class EmptyMatrix(InvalidMatrix):
    pass


def _frozen(values, shape_tail, name) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise ValueError(f"{name} must have shape (tiles, {', '.join(map(str, shape_tail))})"
                         if shape_tail else f"{name} must have shape (tiles,)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ConfidenceMatrix:
    """Per-tile scores over colors, numbers, and the joker class.

    ``color_conf`` is (tiles, 4) in canonical color order, ``number_conf`` is
    (tiles, 13) with column ``n - 1`` holding number ``n``, and ``joker_conf``
    is (tiles,). Scores are not required to be normalized. Shapes are checked
    on construction; value constraints are checked by :func:`validate_matrix`.
    """

    color_conf: np.ndarray
    number_conf: np.ndarray
    joker_conf: np.ndarray = field(default=None)

    def __post_init__(self):
        color = _frozen(self.color_conf, (N_COLORS,), "color_conf")
        number = _frozen(self.number_conf, (N_NUMBERS,), "number_conf")
        if self.joker_conf is None:
            joker = np.zeros(len(color))
            joker.setflags(write=False)
        else:
            joker = _frozen(self.joker_conf, (), "joker_conf")
        if not len(color) == len(number) == len(joker):
            raise ValueError("color, number and joker channels disagree on tile count")
        object.__setattr__(self, "color_conf", color)
        object.__setattr__(self, "number_conf", number)
        object.__setattr__(self, "joker_conf", joker)

    @property
    def tile_count(self) -> int:
        return len(self.color_conf)

    def __eq__(self, other):
        if not isinstance(other, ConfidenceMatrix):
            return NotImplemented
        return (np.array_equal(self.color_conf, other.color_conf)
                and np.array_equal(self.number_conf, other.number_conf)
                and np.array_equal(self.joker_conf, other.joker_conf))

    def scaled(self, factor: float) -> "ConfidenceMatrix":
        return ConfidenceMatrix(self.color_conf * factor, self.number_conf * factor,
                                self.joker_conf * factor)

    @classmethod
    def one_hot(cls, tiles) -> "ConfidenceMatrix":
        """Unit scores on the given identities and zero elsewhere."""
        k = len(tiles)
        color = np.zeros((k, N_COLORS))
        number = np.zeros((k, N_NUMBERS))
        joker = np.zeros(k)
        for t, tile in enumerate(tiles):
            if tile.is_joker:
                joker[t] = 1.0
            else:
                color[t, tile.color] = 1.0
                number[t, tile.number - 1] = 1.0
        return cls(color, number, joker)


def validate_matrix(m: ConfidenceMatrix) -> None:
    """Raise an :class:`InvalidMatrix` subclass if ``m`` breaks a value invariant."""
    if m.tile_count < 1:
        raise EmptyMatrix("confidence matrix has no tiles")
    channels = (
        ("color", m.color_conf, lambda j: Color(j).label),
        ("number", m.number_conf, lambda j: str(j + 1)),
        ("joker", m.joker_conf[:, None], lambda j: "joker"),
    )
    for name, values, label in channels:
        bad = ~np.isfinite(values)
        if bad.any():
            t, j = map(int, np.argwhere(bad)[0])
            raise NonFiniteScore(f"tile {t}: {name} score for {label(j)} is {values[t, j]}")
        neg = values < 0
        if neg.any():
            t, j = map(int, np.argwhere(neg)[0])
            raise NegativeScore(f"tile {t}: {name} score for {label(j)} is {values[t, j]}")


def score(tiles, m: ConfidenceMatrix) -> float:
    """Total confidence of a labeling: color + number per regular tile, joker score per joker.

    The sum is correctly rounded (``math.fsum``), so it does not depend on
    summation order.
    """
    if len(tiles) != m.tile_count:
        raise LengthMismatch(f"{len(tiles)} identities for {m.tile_count} tiles")
    terms = []
    for t, tile in enumerate(tiles):
        if tile.is_joker:
            terms.append(float(m.joker_conf[t]))
        else:
            terms.append(float(m.color_conf[t, tile.color]))
            terms.append(float(m.number_conf[t, tile.number - 1]))
    return math.fsum(terms)


class LengthMismatch(ValueError):
    pass


class SetKind(enum.Enum):
    GROUP = "Group"
    RUN_FORWARD = "Run(forward)"
    RUN_REVERSE = "Run(reverse)"

    @property
    def is_run(self) -> bool:
        return self is not SetKind.GROUP

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SetAssignment:
    identities: tuple
    kind: SetKind
    score: float
