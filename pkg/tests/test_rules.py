import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rummi import JOKER, Color, SetKind, Tile, is_valid_group, is_valid_run, is_valid_set
from rummi.core import all_identities

from oracles import expected_kind

R, B, K, Y = Color.RED, Color.BLUE, Color.BLACK, Color.YELLOW


def T(n, c):
    return Tile(n, c)


identities = st.sampled_from(all_identities())


@pytest.mark.parametrize("tiles, ok", [
    ([T(7, R), T(7, B), T(7, K)], True),
    ([T(7, R), T(7, R), T(7, B)], False),
    ([T(7, R), JOKER, T(7, K)], True),
    ([T(7, R), T(8, R), T(9, R)], False),
    ([T(7, R), T(7, B), T(7, K), T(7, Y)], True),
    ([T(7, R), T(7, B), T(7, K), JOKER], True),
    ([T(7, R), JOKER, JOKER], True),
    ([T(7, R), T(7, B)], False),
    ([T(7, R), T(7, B), T(7, K), T(7, Y), JOKER], False),
    ([], False),
])
def test_is_valid_group(tiles, ok):
    assert is_valid_group(tiles) is ok


@pytest.mark.parametrize("tiles, ok", [
    ([T(4, B), T(5, B), T(6, B)], True),
    ([T(4, B), JOKER, T(6, B)], True),
    ([T(12, R), JOKER, JOKER], False),
    ([T(4, B), T(6, B), T(5, B)], False),
    ([JOKER, T(1, R), T(2, R)], False),
    ([JOKER, JOKER, T(3, R)], True),
    ([T(4, B), T(5, R), T(6, B)], False),
    ([T(n, K) for n in range(1, 14)], True),
    ([T(4, B), T(5, B)], False),
])
def test_is_valid_run(tiles, ok):
    assert is_valid_run(tiles) is ok


@pytest.mark.parametrize("tiles, kind", [
    ([T(7, R), T(7, B), T(7, K)], SetKind.GROUP),
    ([T(6, B), T(5, B), T(4, B)], SetKind.RUN_REVERSE),
    ([T(1, R), T(2, B), T(3, R)], None),
    ([T(4, B), T(5, B), T(6, B)], SetKind.RUN_FORWARD),
    # readable as group and as run: group wins
    ([JOKER, T(5, R), JOKER], SetKind.GROUP),
])
def test_is_valid_set(tiles, kind):
    assert is_valid_set(tiles) == kind


def test_three_jokers_never_valid():
    assert is_valid_set([JOKER] * 3) is None
    assert is_valid_set([T(3, R), JOKER, JOKER, JOKER]) is None


@given(st.lists(identities, min_size=3, max_size=4), st.randoms())
def test_group_validity_is_permutation_invariant(tiles, rnd):
    shuffled = list(tiles)
    rnd.shuffle(shuffled)
    assert is_valid_group(tiles) == is_valid_group(shuffled)


@given(st.lists(identities, max_size=16))
def test_length_bounds(tiles):
    if len(tiles) < 3 or len(tiles) > 13:
        assert is_valid_set(tiles) is None


@given(st.integers(3, 13), st.integers(0, 3), st.data())
def test_reversed_joker_free_run_is_only_valid_reversed(k, color, data):
    start = data.draw(st.integers(1, 14 - k))
    run = [T(start + i, Color(color)) for i in range(k)]
    assert is_valid_run(run)
    assert not is_valid_run(run[::-1])
    assert is_valid_set(run[::-1]) == SetKind.RUN_REVERSE


@given(st.lists(identities, min_size=3, max_size=5))
def test_matches_constructive_oracle(tiles):
    assert is_valid_set(tiles) == expected_kind(tiles)


def test_all_triples_match_constructive_oracle():
    ids = all_identities()
    bad = [t for t in itertools.product(ids, repeat=3) if is_valid_set(t) != expected_kind(t)]
    assert not bad, bad[:5]
