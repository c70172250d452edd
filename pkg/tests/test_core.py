import math

import numpy as np
import pytest

from rummi import (
    JOKER,
    Color,
    ConfidenceMatrix,
    EmptyMatrix,
    LengthMismatch,
    NegativeScore,
    NonFiniteScore,
    Tile,
    canonical_index,
    identity_from_index,
    parse_identity,
    score,
    validate_matrix,
)
from rummi.core import all_identities


def test_canonical_index_examples():
    assert canonical_index(Tile(1, Color.RED)) == 0
    assert canonical_index(JOKER) == 52
    assert canonical_index(Tile(2, Color.RED)) == 4


def test_canonical_index_is_a_bijection():
    ids = all_identities()
    assert len(ids) == 53
    assert [canonical_index(t) for t in ids] == list(range(53))
    for i in range(53):
        assert canonical_index(identity_from_index(i)) == i
    with pytest.raises(ValueError):
        identity_from_index(53)


def test_order_is_total_and_puts_joker_last():
    ids = list(all_identities())
    shuffled = ids[::-1]
    assert sorted(shuffled) == ids
    assert max(ids) is JOKER
    assert Tile(1, Color.YELLOW) < Tile(2, Color.RED)
    assert Tile(5, Color.RED) < Tile(5, Color.BLUE)


def test_exactly_four_colors_in_order():
    assert list(Color) == [Color.RED, Color.BLUE, Color.BLACK, Color.YELLOW]
    assert Color.parse("orange") is Color.YELLOW


@pytest.mark.parametrize("bad", [0, 14, -1])
def test_tile_number_range(bad):
    with pytest.raises(ValueError):
        Tile(bad, Color.RED)


@pytest.mark.parametrize("token, expected", [
    ("7-red", Tile(7, Color.RED)),
    ("13-Orange", Tile(13, Color.YELLOW)),
    ("joker", JOKER),
    ([4, "blue"], Tile(4, Color.BLUE)),
    ({"number": 2, "color": "black"}, Tile(2, Color.BLACK)),
    ({"joker": True}, JOKER),
])
def test_parse_identity(token, expected):
    assert parse_identity(token) == expected


def test_validate_matrix_accepts_zeros():
    validate_matrix(ConfidenceMatrix(np.zeros((3, 4)), np.zeros((3, 13)), np.zeros(3)))


def test_validate_matrix_negative_names_the_cell():
    color = np.zeros((3, 4))
    color[1, 0] = -0.1
    with pytest.raises(NegativeScore, match="tile 1: color score for red"):
        validate_matrix(ConfidenceMatrix(color, np.zeros((3, 13))))


def test_validate_matrix_non_finite():
    number = np.zeros((2, 13))
    number[0, 6] = math.nan
    with pytest.raises(NonFiniteScore, match="tile 0: number score for 7"):
        validate_matrix(ConfidenceMatrix(np.zeros((2, 4)), number))
    with pytest.raises(NonFiniteScore, match="joker"):
        validate_matrix(ConfidenceMatrix(np.zeros((1, 4)), np.zeros((1, 13)), [math.inf]))


def test_validate_matrix_empty():
    with pytest.raises(EmptyMatrix):
        validate_matrix(ConfidenceMatrix(np.zeros((0, 4)), np.zeros((0, 13)), np.zeros(0)))


def test_matrix_shape_checks():
    with pytest.raises(ValueError):
        ConfidenceMatrix(np.zeros((3, 5)), np.zeros((3, 13)))
    with pytest.raises(ValueError):
        ConfidenceMatrix(np.zeros((3, 4)), np.zeros((2, 13)))


def test_matrix_is_immutable():
    m = ConfidenceMatrix(np.zeros((1, 4)), np.zeros((1, 13)))
    with pytest.raises(ValueError):
        m.color_conf[0, 0] = 1.0


def test_score_example_colors(example_matrix):
    m = ConfidenceMatrix(example_matrix.color_conf, np.zeros((3, 13)))
    ids = [Tile(1, Color.RED), Tile(1, Color.BLUE), Tile(1, Color.YELLOW)]
    assert score(ids, m) == 1.8


def test_score_zero_matrix_and_joker_channel():
    zero = ConfidenceMatrix(np.zeros((2, 4)), np.zeros((2, 13)))
    assert score([Tile(3, Color.RED), JOKER], zero) == 0
    single = ConfidenceMatrix(np.zeros((1, 4)), np.zeros((1, 13)), [0.4])
    assert score([JOKER], single) == 0.4


def test_score_is_order_independent():
    # 0.1 + 0.2 + 0.3 differs from 0.3 + 0.2 + 0.1 in naive float arithmetic
    color = np.array([[0.1, 0, 0, 0], [0.2, 0, 0, 0], [0.3, 0, 0, 0]])
    m = ConfidenceMatrix(color, np.zeros((3, 13)))
    rev = ConfidenceMatrix(color[::-1], np.zeros((3, 13)))
    ids = [Tile(1, Color.RED)] * 3
    assert score(ids, m) == score(ids, rev) == 0.6


def test_score_length_mismatch():
    with pytest.raises(LengthMismatch):
        score([JOKER], ConfidenceMatrix(np.zeros((2, 4)), np.zeros((2, 13))))
