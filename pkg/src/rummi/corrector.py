"""Most-likely valid labeling of one clustered set.

The solver enumerates every group and run template and, within each
template, picks the best color mapping / joker placement in closed form.
Comparisons are done on exact integers: every float score is a dyadic
rational, so scaling by the largest denominator makes all sums exact and
the reported score is the correctly rounded total (same value
:func:`rummi.core.score` returns).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    JOKER_INDEX,
    MAX_JOKERS,
    N_COLORS,
    N_NUMBERS,
    ConfidenceMatrix,
    SetAssignment,
    identity_from_index,
    score,
    validate_matrix,
)
from .rules import is_valid_set

__all__ = [
    "BadSize",
    "CorrectionResult",
    "CorrectorConfig",
    "Infeasible",
    "TooLarge",
    "brute_force_correct",
    "correct_set",
    "raw_argmax",
    "score",
]


class Infeasible(RuntimeError):
    pass


class BadSize(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CorrectorConfig:
    max_jokers: int = MAX_JOKERS
    allow_groups: bool = True
    allow_runs: bool = True


@dataclass(frozen=True)
class CorrectionResult:
    assignment: SetAssignment
    raw_argmax: tuple
    raw_valid: bool
    score_gap: float

    @property
    def identities(self) -> tuple:
        return self.assignment.identities


class _ExactMatrix:
    """Integer numerators of all scores over one shared power-of-two denominator."""

    def __init__(self, m: ConfidenceMatrix):
        values = np.concatenate([m.color_conf.ravel(), m.number_conf.ravel(), m.joker_conf])
        ratios = [float(v).as_integer_ratio() for v in values]
        self.denominator = max(q for _, q in ratios)
        ints = [p * (self.denominator // q) for p, q in ratios]
        k = m.tile_count
        nc, nn = k * N_COLORS, k * N_NUMBERS
        self.color = [ints[t * N_COLORS:(t + 1) * N_COLORS] for t in range(k)]
        self.number = [ints[nc + t * N_NUMBERS:nc + (t + 1) * N_NUMBERS] for t in range(k)]
        self.joker = ints[nc + nn:]
        self.k = k

    def to_float(self, total: int) -> float:
        return float(Fraction(total, self.denominator))


def _better(total, key, best):
    return best is None or total > best[0] or (total == best[0] and key < best[1])


@functools.lru_cache(maxsize=None)
def _joker_subsets(k: int, max_jokers: int) -> tuple:
    out = []
    for r in range(min(max_jokers, k - 1) + 1):
        out.extend(itertools.combinations(range(k), r))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _color_injections(m: int) -> tuple:
    # lexicographic order, so the first maximum is the canonical tie-break winner
    return tuple(itertools.permutations(range(N_COLORS), m))


def _best_group(ex: _ExactMatrix, max_jokers: int):
    k = ex.k
    best = None
    for jokers in _joker_subsets(k, max_jokers):
        regular = [t for t in range(k) if t not in jokers]
        if len(regular) > N_COLORS:
            continue
        joker_total = sum(ex.joker[t] for t in jokers)

        best_colors, best_color_total = None, None
        for colors in _color_injections(len(regular)):
            total = sum(ex.color[t][c] for t, c in zip(regular, colors))
            if best_color_total is None or total > best_color_total:
                best_colors, best_color_total = colors, total

        best_n, best_number_total = None, None
        for n in range(N_NUMBERS):
            total = sum(ex.number[t][n] for t in regular)
            if best_number_total is None or total > best_number_total:
                best_n, best_number_total = n, total

        key = [JOKER_INDEX] * k
        for t, c in zip(regular, best_colors):
            key[t] = best_n * N_COLORS + c
        total = joker_total + best_color_total + best_number_total
        key = tuple(key)
        if _better(total, key, best):
            best = (total, key)
    return best


def _best_run(ex: _ExactMatrix, max_jokers: int):
    k = ex.k
    best = None
    cap = min(max_jokers, k - 1)
    for c in range(N_COLORS):
        for reverse in (False, True):
            for start in range(1, N_NUMBERS - k + 2):
                numbers = [start + (k - 1 - i if reverse else i) for i in range(k)]
                tile_terms = [ex.color[i][c] + ex.number[i][n - 1] for i, n in enumerate(numbers)]
                gains = [(ex.joker[i] - tile_terms[i], i) for i in range(k)]
                # ties in gain: later positions become jokers first (lexicographically smaller list)
                wanted = sorted((g for g in gains if g[0] > 0), reverse=True)[:cap]
                joker_at = {i for _, i in wanted}
                total = 0
                key = []
                for i, n in enumerate(numbers):
                    if i in joker_at:
                        total += ex.joker[i]
                        key.append(JOKER_INDEX)
                    else:
                        total += tile_terms[i]
                        key.append((n - 1) * N_COLORS + c)
                key = tuple(key)
                if _better(total, key, best):
                    best = (total, key)
    return best


def _raw_argmax_exact(ex: _ExactMatrix):
    key = []
    total = 0
    for t in range(ex.k):
        # max() returns the first maximum: smallest color rank / number
        c = max(range(N_COLORS), key=lambda j: (ex.color[t][j], -j))
        n = max(range(N_NUMBERS), key=lambda j: (ex.number[t][j], -j))
        regular = ex.color[t][c] + ex.number[t][n]
        if ex.joker[t] > regular:
            key.append(JOKER_INDEX)
            total += ex.joker[t]
        else:
            key.append(n * N_COLORS + c)
            total += regular
    return total, tuple(key)


def raw_argmax(m: ConfidenceMatrix) -> tuple:
    """Per-tile unconstrained best identity, ties broken canonically."""
    _, key = _raw_argmax_exact(_ExactMatrix(m))
    return tuple(identity_from_index(i) for i in key)


def _result(m: ConfidenceMatrix, ex: _ExactMatrix, best) -> CorrectionResult:
    total, key = best
    ids = tuple(identity_from_index(i) for i in key)
    kind = is_valid_set(ids)
    if kind is None:
        raise Infeasible(f"solver produced an invalid set {[str(t) for t in ids]}")
    raw_total, raw_key = _raw_argmax_exact(ex)
    raw = tuple(identity_from_index(i) for i in raw_key)
    assigned = ex.to_float(total)
    return CorrectionResult(
        assignment=SetAssignment(ids, kind, assigned),
        raw_argmax=raw,
        raw_valid=is_valid_set(raw) is not None,
        score_gap=ex.to_float(raw_total) - assigned,
    )


def correct_set(m: ConfidenceMatrix, cfg: Optional[CorrectorConfig] = None) -> CorrectionResult:
    """Highest-scoring valid labeling of the tiles in ``m`` (spatial order).

    Raises :class:`BadSize` outside 3..13 tiles, an ``InvalidMatrix``
    subclass for bad scores, and :class:`Infeasible` if no template applies.
    """
    cfg = cfg or CorrectorConfig()
    validate_matrix(m)
    k = m.tile_count
    if not 3 <= k <= N_NUMBERS:
        raise BadSize(f"sets hold 3..{N_NUMBERS} tiles, got {k}")
    ex = _ExactMatrix(m)
    candidates = []
    if cfg.allow_groups and k <= N_COLORS:
        candidates.append(_best_group(ex, cfg.max_jokers))
    if cfg.allow_runs:
        candidates.append(_best_run(ex, cfg.max_jokers))
    best = None
    for cand in candidates:
        if cand is not None and _better(cand[0], cand[1], best):
            best = cand
    if best is None:
        raise Infeasible(f"no valid template for {k} tiles")
    return _result(m, ex, best)


# ---------------------------------------------------------------------------
# brute-force oracle

@functools.lru_cache(maxsize=None)
def _valid_tuples(k: int) -> np.ndarray:
    """Canonical-index tuples of every valid k-set, lexicographically sorted.

    Built by extending valid (k-1)-sets one tile at a time: a prefix of a
    valid set of length >= 3 is itself valid, so no valid set is skipped.
    """
    ids = [identity_from_index(i) for i in range(JOKER_INDEX + 1)]
    if k == 3:
        rows = [idx for idx in itertools.product(range(len(ids)), repeat=3)
                if is_valid_set([ids[i] for i in idx]) is not None]
    else:
        rows = [tuple(prefix) + (i,)
                for prefix in _valid_tuples(k - 1)
                for i in range(len(ids))
                if is_valid_set([ids[j] for j in prefix] + [ids[i]]) is not None]
    out = np.array(sorted(rows), dtype=np.int64)
    out.setflags(write=False)
    return out


def _identity_scores(m: ConfidenceMatrix) -> np.ndarray:
    # (tiles, 53): column (n-1)*4 + c is color + number, last column joker
    regular = m.number_conf[:, :, None] + m.color_conf[:, None, :]
    return np.concatenate([regular.reshape(m.tile_count, -1), m.joker_conf[:, None]], axis=1)


def brute_force_correct(m: ConfidenceMatrix) -> CorrectionResult:
    """Exhaustive search over every valid labeling; test oracle for 3 or 4 tiles."""
    validate_matrix(m)
    k = m.tile_count
    if k > 4:
        raise TooLarge(f"brute force is limited to 4 tiles, got {k}")
    if k < 3:
        raise BadSize(f"sets hold at least 3 tiles, got {k}")
    table = _valid_tuples(k)
    per_tile = _identity_scores(m)
    approx = per_tile[np.arange(k), table].sum(axis=1)
    top = approx.max()
    # float sums can misorder near-ties; rescore everything close with the exact scorer
    slack = 1e-9 * max(1.0, abs(top))
    best_ids, best_score = None, None
    for row in table[approx >= top - slack]:
        ids = tuple(identity_from_index(int(i)) for i in row)
        s = score(ids, m)
        if best_score is None or s > best_score:  # rows are sorted, first maximum wins ties
            best_ids, best_score = ids, s
    if best_ids is None:
        raise Infeasible(f"no valid labeling for {k} tiles")
    raw = tuple(
        identity_from_index(int(i)) for i in _per_tile_argmax(per_tile, m)
    )
    raw_score = score(raw, m)
    return CorrectionResult(
        assignment=SetAssignment(best_ids, is_valid_set(best_ids), best_score),
        raw_argmax=raw,
        raw_valid=is_valid_set(raw) is not None,
        score_gap=raw_score - best_score,
    )


def _per_tile_argmax(per_tile: np.ndarray, m: ConfidenceMatrix) -> list:
    out = []
    for t in range(m.tile_count):
        exact = [math.fsum([m.color_conf[t, i % N_COLORS], m.number_conf[t, i // N_COLORS]])
                 for i in range(JOKER_INDEX)] + [float(m.joker_conf[t])]
        out.append(max(range(len(exact)), key=lambda i: (exact[i], -i)))
    return out
