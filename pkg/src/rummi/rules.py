"""Validity of Rummikub groups, runs and sets, with jokers as wildcards."""

from __future__ import annotations

from typing import Optional, Sequence

from .core import MAX_JOKERS, N_COLORS, N_NUMBERS, SetKind, TileIdentity


def _split(tiles: Sequence[TileIdentity]):
    jokers = sum(1 for t in tiles if t.is_joker)
    return jokers, [t for t in tiles if not t.is_joker]


def is_valid_group(tiles: Sequence[TileIdentity]) -> bool:
    """3 or 4 tiles with one number and pairwise distinct colors.

    Jokers fill in for missing colors, so any arrangement of at most two
    jokers next to a consistent partial group is accepted.
    """
    if len(tiles) not in (3, 4):
        return False
    jokers, regular = _split(tiles)
    if jokers > MAX_JOKERS:
        return False
    if len({t.number for t in regular}) > 1:
        return False
    colors = [t.color for t in regular]
    if len(set(colors)) != len(colors):
        return False
    return len(regular) + jokers <= N_COLORS


def is_valid_run(tiles: Sequence[TileIdentity]) -> bool:
    """3 to 13 same-color tiles ascending by one, read in the given order."""
    k = len(tiles)
    if not 3 <= k <= N_NUMBERS:
        return False
    jokers, regular = _split(tiles)
    if jokers > MAX_JOKERS or not regular:
        return False
    if len({t.color for t in regular}) != 1:
        return False
    starts = {t.number - i for i, t in enumerate(tiles) if not t.is_joker}
    if len(starts) != 1:
        return False
    start = starts.pop()
    return start >= 1 and start + k - 1 <= N_NUMBERS


def is_valid_set(tiles: Sequence[TileIdentity]) -> Optional[SetKind]:
    """Kind of set formed by ``tiles`` in spatial order, or None if invalid.

    Precedence on ambiguity: group, then forward run, then reversed run.
    """
    tiles = list(tiles)
    if is_valid_group(tiles):
        return SetKind.GROUP
    if is_valid_run(tiles):
        return SetKind.RUN_FORWARD
    if is_valid_run(tiles[::-1]):
        return SetKind.RUN_REVERSE
    return None
