"""Knowledge-based correction of Rummikub tile classifications."""

from .core import (
    JOKER,
    Color,
    ConfidenceMatrix,
    EmptyMatrix,
    InvalidMatrix,
    Joker,
    LengthMismatch,
    NegativeScore,
    NonFiniteScore,
    SetAssignment,
    SetKind,
    Tile,
    canonical_index,
    identity_from_index,
    parse_identity,
    score,
    validate_matrix,
)
from .corrector import CorrectionResult, CorrectorConfig, brute_force_correct, correct_set
from .rules import is_valid_group, is_valid_run, is_valid_set

__version__ = "0.1.0"
