from __future__ import annotations

import pytest

from sdpexact.model import quadratic_program

FOUR_POINTS = ["x1*x2 - 2*x2^2 + 2*x2", "x1^2 - x2^2 - x1 + x2"]
TWISTED_CUBIC = ["x2 - x1^2", "x3 - x1*x2"]


@pytest.fixture
def four_points():
    return quadratic_program(FOUR_POINTS, 2)


@pytest.fixture
def twisted_cubic():
    return quadratic_program(TWISTED_CUBIC, 3)
