"""Exact finite metric spaces of diameter at most 1.

Every distance is a ``fractions.Fraction`` and every predicate is an exact
comparison; nothing in this module (or anywhere downstream of it) touches
floating point.  Points are opaque string labels; identity is by label.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DomainMismatch,
    EmptyBase,
    EmptySubset,
    Inadmissible,
    LabelCollision,
    MalformedInput,
    MetricViolation,
    ParseError,
)

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_CHARS = set("0123456789/-")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` (or a bare integer ``"p"``) into an exact fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"expected rational string, got {type(text).__name__}")
    s = text.strip()
    if not s or not set(s) <= _RATIONAL_CHARS:
        raise ParseError(f"not a rational: {text!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational: {text!r} ({exc})") from None


def format_rational(value: Fraction) -> str:
    """Lowest-terms rendering: ``1/2``, integers as ``0`` or ``1``."""
    return str(Fraction(value))


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Immutable labeled point set with an exact symmetric distance matrix.

    Instances are assumed valid; :func:`validate_space` is the gate for
    untrusted data.  Safe to share between threads.
    """

    points: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self.points)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise MalformedInput(f"unknown point {label!r}") from None

    def dist(self, x: str, y: str) -> Fraction:
        return self.rows[self.index(x)][self.index(y)]

    def pairs(self) -> Iterator[tuple[str, str]]:
        return itertools.combinations(self.points, 2)

    def profile(self, x: str, over: Iterable[str] | None = None) -> dict[str, Fraction]:
        """Distances from ``x`` to ``over`` (default: every point)."""
        targets = self.points if over is None else tuple(over)
        return {w: self.dist(x, w) for w in targets}

    def restrict(self, labels: Sequence[str]) -> "FiniteMetricSpace":
        kept = tuple(dict.fromkeys(labels))
        if not kept:
            raise EmptySubset("cannot restrict to the empty set")
        idx = [self.index(lbl) for lbl in kept]
        rows = tuple(tuple(self.rows[i][j] for j in idx) for i in idx)
        return FiniteMetricSpace(kept, rows)

    def extended(self, label: str, values: Mapping[str, Fraction]) -> "FiniteMetricSpace":
        """Raw one-point extension; callers must have checked admissibility."""
        if label in self:
            raise LabelCollision(f"label {label!r} already present")
        new_row = tuple(values[p] for p in self.points)
        rows = tuple(
            old + (new_row[i],) for i, old in enumerate(self.rows)
        ) + (new_row + (ZERO,),)
        return FiniteMetricSpace(self.points + (label,), rows)

    def as_object(self) -> dict:
        return {
            "points": list(self.points),
            "dist": [[format_rational(v) for v in row] for row in self.rows],
        }


def validate_space(points: Sequence[str], matrix: Sequence[Sequence]) -> FiniteMetricSpace:
    """Check the metric axioms and build a space, or report every violation.

    Raises :class:`MalformedInput` for structural problems and
    :class:`MetricViolation` carrying the full list of broken constraints
    (asymmetry, triangle with the offending triple, diameter, zero or
    negative off-diagonal, nonzero diagonal).
    """
    labels = list(points)
    if not labels:
        raise MalformedInput("a space needs at least one point")
    if any(not isinstance(lbl, str) or not lbl for lbl in labels):
        raise MalformedInput("point labels must be nonempty strings")
    if len(set(labels)) != len(labels):
        raise MalformedInput("duplicate point labels")
    n = len(labels)
    if len(matrix) != n:
        raise MalformedInput(f"matrix has {len(matrix)} rows, expected {n}")
    rows: list[list[Fraction]] = []
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise MalformedInput(f"matrix row {i} has {len(row)} entries, expected {n}")
        try:
            rows.append([parse_rational(v) for v in row])
        except ParseError as exc:
            raise MalformedInput(f"matrix row {i}: {exc}") from None

    violations: list[str] = []
    for i in range(n):
        if rows[i][i] != ZERO:
            violations.append(f"nonzero diagonal at {labels[i]!r}: {rows[i][i]}")
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                violations.append(
                    f"asymmetry on ({labels[i]!r},{labels[j]!r}): "
                    f"{rows[i][j]} vs {rows[j][i]}"
                )
            if rows[i][j] <= ZERO:
                violations.append(
                    f"zero or negative distance on ({labels[i]!r},{labels[j]!r}): {rows[i][j]}"
                )
            if rows[i][j] > ONE:
                violations.append(
                    f"diameter exceeded on ({labels[i]!r},{labels[j]!r}): {rows[i][j]}"
                )
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if k == i or k == j:
                    continue
                if rows[i][j] > rows[i][k] + rows[k][j]:
                    violations.append(
                        f"triangle violation on ({labels[i]!r},{labels[j]!r},{labels[k]!r}): "
                        f"{rows[i][j]} > {rows[i][k]} + {rows[k][j]}"
                    )
    if violations:
        raise MetricViolation(violations)
    return FiniteMetricSpace(tuple(labels), tuple(tuple(r) for r in rows))


def katetov_violations(base: FiniteMetricSpace, values: Mapping[str, Fraction]) -> list[str]:
    """List every broken one-point-extension constraint of ``values``.

    The constraints are |f(x)-f(y)| <= d(x,y) <= f(x)+f(y) and 0 <= f <= 1.
    Two zeros at distinct points already break the right inequality, so the
    at-most-one-zero rule needs no separate check.
    """
    if set(values) != set(base.points):
        raise DomainMismatch(
            f"values defined on {sorted(values)}, base has {sorted(base.points)}"
        )
    out: list[str] = []
    for x in base.points:
        v = values[x]
        if v < ZERO or v > ONE:
            out.append(f"value at {x!r} out of [0,1]: {v}")
    for x, y in base.pairs():
        d = base.dist(x, y)
        fx, fy = values[x], values[y]
        if abs(fx - fy) > d:
            out.append(f"|f({x})-f({y})| = {abs(fx - fy)} > d = {d}")
        if d > fx + fy:
            out.append(f"d({x},{y}) = {d} > f({x})+f({y}) = {fx + fy}")
    return out


def is_katetov(base: FiniteMetricSpace, values: Mapping[str, Fraction]) -> tuple[bool, list[str]]:
    """Exact admissibility verdict plus the list of violated pairs."""
    violations = katetov_violations(base, values)
    return not violations, violations


@dataclass(frozen=True)
class KatetovFunction:
    """An admissible distance profile over a finite space (a one-point type).

    Construction validates admissibility exactly and raises
    :class:`Inadmissible` otherwise.  A zero value marks the realization as
    the existing point carrying it.
    """

    base: FiniteMetricSpace
    values: Mapping[str, Fraction]

    def __post_init__(self) -> None:
        ordered = {p: Fraction(self.values[p]) for p in self.base.points}
        if set(self.values) != set(ordered):
            raise DomainMismatch("profile domain differs from base points")
        object.__setattr__(self, "values", ordered)
        violations = katetov_violations(self.base, ordered)
        if violations:
            raise Inadmissible(violations)

    def __getitem__(self, x: str) -> Fraction:
        return self.values[x]

    def items(self):
        return self.values.items()

    def labels(self) -> tuple[str, ...]:
        return self.base.points

    def zero_point(self) -> str | None:
        for x, v in self.values.items():
            if v == ZERO:
                return x
        return None


def distance_of_type(f: KatetovFunction) -> Fraction:
    """The minimum prescribed distance of the profile to its base."""
    if not f.base.points:
        raise EmptyBase("type over the empty base has no distance")
    return min(f.values.values())


def restrict_type(f: KatetovFunction, subset: Sequence[str]) -> KatetovFunction:
    """Restriction of a profile to a nonempty subset of its base."""
    kept = tuple(dict.fromkeys(subset))
    if not kept:
        raise EmptySubset("cannot restrict a type to the empty set")
    sub = f.base.restrict(kept)
    return KatetovFunction(sub, {x: f[x] for x in kept})


def extend_with_point(
    space: FiniteMetricSpace, f: KatetovFunction, label: str
) -> tuple[FiniteMetricSpace, str]:
    """Realize the profile ``f``: either a fresh point or an identification.

    Returns ``(space, x)`` unchanged when ``f`` is zero at ``x`` (a metric
    space has no distinct points at distance 0), else the extended space and
    the fresh label.
    """
    if f.base != space:
        raise DomainMismatch("profile is not over the given space")
    zero = f.zero_point()
    if zero is not None:
        return space, zero
    return space.extended(label, f.values), label


def space_to_object(space: FiniteMetricSpace) -> dict:
    return space.as_object()


def space_from_object(obj, where: str = "space") -> FiniteMetricSpace:
    """Structured-object counterpart of :func:`parse_space`."""
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    if "points" not in obj or "dist" not in obj:
        raise ParseError(f"{where}: missing field 'points' or 'dist'")
    points = obj["points"]
    dist = obj["dist"]
    if not isinstance(points, list) or any(not isinstance(p, str) for p in points):
        raise ParseError(f"{where}.points: expected a list of strings")
    if not isinstance(dist, list):
        raise ParseError(f"{where}.dist: expected a list of rows")
    n = len(points)
    if len(dist) != n:
        raise ParseError(f"{where}.dist: {len(dist)} rows for {n} points")
    matrix: list[list[Fraction]] = []
    for i, row in enumerate(dist):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ParseError(f"{where}.dist[{i}]: expected {n} entries, got {got}")
        parsed = []
        for j, entry in enumerate(row):
            try:
                parsed.append(parse_rational(entry))
            except ParseError as exc:
                raise ParseError(f"{where}.dist[{i}][{j}]: {exc}") from None
        matrix.append(parsed)
    try:
        return validate_space(points, matrix)
    except MalformedInput as exc:
        raise ParseError(f"{where}: {exc}") from None


def serialize_space(space: FiniteMetricSpace) -> str:
    """Deterministic textual form; inverse of :func:`parse_space`."""
    return json.dumps(space_to_object(space), indent=2) + "\n"


def parse_space(text: str) -> FiniteMetricSpace:
    """Parse and validate the textual space format.

    Raises :class:`ParseError` (with line/field position) for malformed text
    and :class:`MetricViolation` when the matrix parses but is not a metric.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return space_from_object(obj)
