import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rummi import ConfidenceMatrix  # noqa: E402

# color confidences of the three-tile worked example (red, blue, black, yellow/orange)
EXAMPLE_COLORS = [
    [0.8, 0.1, 0.05, 0.05],
    [0.2, 0.7, 0.09, 0.01],
    [0.5, 0.15, 0.05, 0.3],
]

ACCEPTANCE_LINES = []


@pytest.fixture
def example_matrix():
    # uniform number scores, so only the colors decide
    return ConfidenceMatrix(EXAMPLE_COLORS, np.full((3, 13), 1 / 13), np.zeros(3))


@pytest.fixture
def record_criterion():
    def record(name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}  {detail}".rstrip())
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
