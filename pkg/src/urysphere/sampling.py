"""Seeded random generation of valid spaces and admissible profiles.

Raw draws are repaired into metrics by shortest-path closure and then capped
at diameter 1; extensions and profiles are sampled coordinate by coordinate
inside the exact admissible interval on the grid of multiples of 1/den, so
every output is valid by construction and reproducible from the seed.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .errors import MalformedInput, OutOfRange
from .metric_core import (
    ONE,
    ZERO,
    FiniteMetricSpace,
    KatetovFunction,
    extend_with_point,
    validate_space,
)


def random_space(
    rng: random.Random, n_points: int, den: int, prefix: str = "x"
) -> FiniteMetricSpace:
    """Random valid space with all distances multiples of 1/den."""
    if n_points < 1:
        raise MalformedInput("need at least one point")
    if den < 2:
        raise OutOfRange("denominator bound must be at least 2")
    labels = [f"{prefix}{i}" for i in range(n_points)]
    n = n_points
    d = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(rng.randint(1, 2 * den), den)
            d[i][j] = d[j][i] = v
    # shortest-path closure repairs triangle violations, then cap at 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                via = d[i][k] + d[k][j]
                if via < d[i][j]:
                    d[i][j] = via
    for i in range(n):
        for j in range(n):
            if i != j and d[i][j] > ONE:
                d[i][j] = ONE
    return validate_space(labels, d)


def _grid_interval(lo: Fraction, hi: Fraction, den: int) -> tuple[int, int]:
    """Integer numerator range of grid points k/den inside [lo, hi]."""
    k_lo = -((-lo.numerator * den) // lo.denominator)
    k_hi = (hi.numerator * den) // hi.denominator
    return k_lo, k_hi


def _sample_value(
    rng: random.Random,
    fixed: dict[str, Fraction],
    dist_to: dict[str, Fraction],
    den: int,
    floor: Fraction,
) -> Fraction:
    lo, hi = floor, ONE
    for u, v in fixed.items():
        d = dist_to[u]
        lo = max(lo, abs(v - d))
        hi = min(hi, v + d)
    k_lo, k_hi = _grid_interval(lo, hi, den)
    if k_lo > k_hi:
        raise MalformedInput("empty admissible grid interval")
    return Fraction(rng.randint(k_lo, k_hi), den)


def random_extension(
    rng: random.Random,
    space: FiniteMetricSpace,
    new_labels: Sequence[str],
    den: int,
) -> FiniteMetricSpace:
    """Extend a space by fresh points with random admissible profiles."""
    out = space
    for label in new_labels:
        values: dict[str, Fraction] = {}
        for w in out.points:
            values[w] = _sample_value(
                rng, values, {u: out.dist(u, w) for u in values},
                den, Fraction(1, den),
            )
        out, _ = extend_with_point(out, KatetovFunction(out, values), label)
    return out


def random_profile(
    rng: random.Random,
    base: FiniteMetricSpace,
    den: int,
    distance: Fraction | None = None,
) -> KatetovFunction:
    """Random admissible profile over ``base``; all values on the 1/den grid.

    With ``distance`` given, the minimum value is pinned to exactly that
    rational (which must itself lie on the grid).
    """
    if distance is not None:
        distance = Fraction(distance)
        if distance <= ZERO or distance > ONE:
            raise OutOfRange(f"type distance {distance} outside (0,1]")
        if den % distance.denominator:
            raise OutOfRange(f"type distance {distance} not on the 1/{den} grid")
    order = list(base.points)
    values: dict[str, Fraction] = {}
    if distance is not None:
        anchor = rng.choice(order)
        values[anchor] = distance
        order.remove(anchor)
        rng.shuffle(order)
    floor = distance if distance is not None else Fraction(1, den)
    for w in order:
        values[w] = _sample_value(
            rng, values, {u: base.dist(u, w) for u in values}, den, floor,
        )
    return KatetovFunction(base, values)
