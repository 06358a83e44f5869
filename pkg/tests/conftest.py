import random
from fractions import Fraction

import pytest

from urysphere.metric_core import FiniteMetricSpace, validate_space


def fr(text) -> Fraction:
    return Fraction(text)


@pytest.fixture
def two_point():
    return validate_space(["a", "b"], [[0, fr("1/2")], [fr("1/2"), 0]])


@pytest.fixture
def rng():
    return random.Random(20260809)


def brute_force_katetov_violations(space, values):
    """Independent oracle: direct loop over all pairs and range checks."""
    bad = []
    pts = space.points
    for x in pts:
        if not (0 <= values[x] <= 1):
            bad.append(("range", x))
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            d = space.dist(x, y)
            if abs(values[x] - values[y]) > d:
                bad.append(("lipschitz", x, y))
            if values[x] + values[y] < d:
                bad.append(("sum", x, y))
    return bad
