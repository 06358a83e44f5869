"""The stationary independence relation on exact finite metric spaces.

Two sets A and C are independent over B when every cross pair at distance
below 1 factors additively through some point of B; over an empty B the
condition forces all cross distances to equal 1.  The canonical extension
formula min(1, min_x(p(x)+d(x,z))) realizes the unique independent
extension of a profile, and the free amalgam is its two-sided counterpart.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

from . import sampling
from .errors import (
    BaseMismatch,
    DomainMismatch,
    MalformedQuery,
    MetricViolation,
    OutOfRange,
    UryError,
)
from .metric_core import (
    ONE,
    ZERO,
    FiniteMetricSpace,
    KatetovFunction,
    distance_of_type,
    extend_with_point,
    format_rational,
    serialize_space,
    validate_space,
)


@dataclass(frozen=True)
class IndependenceQuery:
    """A and C over B inside one ambient space; A and C nonempty."""

    ambient: FiniteMetricSpace
    A: tuple[str, ...]
    B: tuple[str, ...]
    C: tuple[str, ...]

    def __post_init__(self) -> None:
        for name, side in (("A", self.A), ("C", self.C)):
            if not side:
                raise MalformedQuery(f"side {name} is empty")
        for side in (self.A, self.B, self.C):
            for lbl in side:
                if lbl not in self.ambient:
                    raise MalformedQuery(f"point {lbl!r} not in ambient")


def independence_failures(
    space: FiniteMetricSpace,
    A: Sequence[str],
    B: Sequence[str],
    C: Sequence[str],
) -> list[tuple[str, str]]:
    """Cross pairs (a, c) with d(a,c) < 1 that factor through no point of B."""
    query = IndependenceQuery(space, tuple(A), tuple(B), tuple(C))
    failing = []
    for a in query.A:
        for c in query.C:
            d = space.dist(a, c)
            if d >= ONE:
                continue
            if not any(space.dist(a, b) + space.dist(b, c) == d for b in query.B):
                failing.append((a, c))
    return failing


def is_independent(
    space: FiniteMetricSpace,
    A: Sequence[str],
    B: Sequence[str],
    C: Sequence[str],
) -> bool:
    return not independence_failures(space, A, B, C)


def independence_witnesses(
    space: FiniteMetricSpace,
    A: Sequence[str],
    B: Sequence[str],
    C: Sequence[str],
) -> dict[tuple[str, str], str | None]:
    """Factoring midpoints per cross pair; ``None`` marks distance-1 pairs.

    Raises :class:`MalformedQuery` if the configuration is not independent.
    """
    query = IndependenceQuery(space, tuple(A), tuple(B), tuple(C))
    out: dict[tuple[str, str], str | None] = {}
    for a in query.A:
        for c in query.C:
            d = space.dist(a, c)
            if d >= ONE:
                out[(a, c)] = None
                continue
            for b in query.B:
                if space.dist(a, b) + space.dist(b, c) == d:
                    out[(a, c)] = b
                    break
            else:
                raise MalformedQuery(f"pair ({a},{c}) does not factor")
    return out


def canonical_extension(p: KatetovFunction, ambient: FiniteMetricSpace) -> KatetovFunction:
    """The unique extension of ``p`` whose realization is independent from
    ``ambient`` over the base of ``p``: z -> min(1, min_x(p(x) + d(x, z)))."""
    base_labels = p.base.points
    if ambient.restrict(base_labels) != p.base:
        raise DomainMismatch("base of the profile is not a subspace of ambient")
    values: dict[str, Fraction] = {}
    for z in ambient.points:
        best = min(p[x] + ambient.dist(x, z) for x in base_labels)
        values[z] = min(ONE, best)
    out = KatetovFunction(ambient, values)
    for x in base_labels:
        assert out[x] == p[x], f"canonical extension failed to extend at {x!r}"
    return out


def prolongation(p: KatetovFunction, eps: Fraction) -> KatetovFunction:
    """Pointwise min(1, p + eps): the profile of a point at distance ``eps``
    from an independent realization of ``p``."""
    eps = Fraction(eps)
    if eps < ZERO or eps > ONE:
        raise OutOfRange(f"prolongation amount {eps} outside [0,1]")
    return KatetovFunction(p.base, {x: min(ONE, v + eps) for x, v in p.items()})


def amalgamate(
    left: FiniteMetricSpace,
    right: FiniteMetricSpace,
    base: Sequence[str],
) -> FiniteMetricSpace:
    """Free amalgam over a shared base: cross distances take the shortest
    path through the base, capped at 1, and equal 1 when the base is empty."""
    base_t = tuple(dict.fromkeys(base))
    for lbl in base_t:
        if lbl not in left or lbl not in right:
            raise BaseMismatch(f"base point {lbl!r} missing from a side")
    overlap = (set(left.points) & set(right.points)) - set(base_t)
    if overlap:
        raise BaseMismatch(f"shared labels outside base: {sorted(overlap)}")
    if base_t and left.restrict(base_t) != right.restrict(base_t):
        raise BaseMismatch("sides disagree on base distances")

    right_only = [r for r in right.points if r not in base_t]
    if not right_only:
        return left

    def cross(a: str, c: str) -> Fraction:
        if not base_t:
            return ONE
        return min(ONE, min(left.dist(a, b) + right.dist(b, c) for b in base_t))

    points = left.points + tuple(right_only)
    n_left = len(left.points)
    rows = []
    for i, p in enumerate(points):
        row = []
        for j, q in enumerate(points):
            if i < n_left and j < n_left:
                row.append(left.dist(p, q))
            elif i >= n_left and j >= n_left:
                row.append(right.dist(p, q))
            elif i < n_left:
                row.append(right.dist(p, q) if p in base_t else cross(p, q))
            else:
                row.append(right.dist(p, q) if q in base_t else cross(q, p))
        rows.append(row)
    return validate_space(points, rows)


# ---------------------------------------------------------------------------
# Brute-force extension enumeration (the uniqueness oracle).


def enumerate_admissible_extensions(
    space: FiniteMetricSpace,
    X: Sequence[str],
    p: KatetovFunction,
    den: int,
) -> Iterator[dict[str, Fraction]]:
    """All admissible full-space extensions of ``p`` with values on the grid
    of multiples of 1/den, via depth-first interval pruning."""
    X_t = tuple(X)
    outside = [w for w in space.points if w not in X_t]
    fixed = {x: p[x] for x in X_t}

    def rec(i: int, acc: dict[str, Fraction]) -> Iterator[dict[str, Fraction]]:
        if i == len(outside):
            yield dict(acc)
            return
        w = outside[i]
        lo, hi = ZERO, ONE
        for u, v in acc.items():
            d = space.dist(u, w)
            lo = max(lo, abs(v - d))
            hi = min(hi, v + d)
        if lo > hi:
            return
        k_lo = -((-lo.numerator * den) // lo.denominator)
        k_hi = (hi.numerator * den) // hi.denominator
        for k in range(k_lo, k_hi + 1):
            acc[w] = Fraction(k, den)
            yield from rec(i + 1, acc)
        acc.pop(w, None)

    yield from rec(0, dict(fixed))


def independent_extensions(
    space: FiniteMetricSpace,
    X: Sequence[str],
    p: KatetovFunction,
    den: int,
) -> list[dict[str, Fraction]]:
    """Grid extensions of ``p`` whose realization is independent from the
    whole ambient over ``X`` (including identifications with old points)."""
    survivors = []
    original = space.points
    for values in enumerate_admissible_extensions(space, X, p, den):
        full = KatetovFunction(space, values)
        extended, label = extend_with_point(space, full, "r#enum")
        if is_independent(extended, (label,), X, original):
            survivors.append(values)
    return survivors


# ---------------------------------------------------------------------------
# Randomized axiom battery.


@dataclass
class AxiomResult:
    name: str
    checked: int = 0
    violations: int = 0
    first_counterexample: str | None = None

    def record(self, ok: bool, detail: Callable[[], str]) -> None:
        self.checked += 1
        if not ok:
            self.violations += 1
            if self.first_counterexample is None:
                self.first_counterexample = detail()


@dataclass
class SirReport:
    seed: int
    trials: int
    results: list[AxiomResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.violations == 0 for r in self.results)

    def to_text(self) -> str:
        lines = [f"independence axiom battery: seed={self.seed} trials={self.trials}"]
        for r in self.results:
            lines.append(f"  {r.name}: checked={r.checked} violations={r.violations}")
        for r in self.results:
            if r.first_counterexample:
                lines.append(f"counterexample [{r.name}]:")
                lines.append(r.first_counterexample)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "trials": self.trials,
                "ok": self.ok,
                "results": [
                    {
                        "axiom": r.name,
                        "checked": r.checked,
                        "violations": r.violations,
                        "first_counterexample": r.first_counterexample,
                    }
                    for r in self.results
                ],
            },
            indent=2,
        ) + "\n"


def _query_text(space: FiniteMetricSpace, **sides: Sequence[str]) -> str:
    parts = [serialize_space(space).rstrip()]
    for name, side in sides.items():
        parts.append(f"{name} = {list(side)}")
    return "\n".join(parts)


def check_sir_axioms(
    trials: int = 200,
    max_points: int = 8,
    max_den: int = 24,
    seed: int = 0,
    amalgam_fn: Callable[..., FiniteMetricSpace] | None = None,
) -> SirReport:
    """Randomized exact checks of symmetry, monotonicity, transitivity,
    existence, stationarity, and the amalgam postcondition.

    Independent-by-construction instances are built with the amalgam (so the
    premises hold), then the conclusions are verified exactly.  Stationarity
    enumerates every grid extension on small outside sets and demands that
    the canonical extension is the lone survivor.
    """
    if trials <= 0:
        raise OutOfRange("trials must be positive")
    amalgam = amalgam_fn or amalgamate
    dens = [q for q in (2, 3, 4, 5, 6, 8, 12, 24) if q <= max_den] or [2]
    results = {
        name: AxiomResult(name)
        for name in ("symmetry", "monotonicity", "transitivity", "existence",
                     "stationarity", "amalgam")
    }

    def checked_amalgam(left, right, base, ctx: str) -> FiniteMetricSpace | None:
        try:
            out = amalgam(left, right, base)
            validate_space(out.points, out.rows)
            left_rest = [p for p in left.points if p not in base]
            right_rest = [p for p in out.points if p not in left.points]
            ok = True
            if left_rest and right_rest:
                ok = is_independent(out, left_rest, base, right_rest)
            results["amalgam"].record(
                ok, lambda: f"[{ctx}] amalgam not independent\n" + _query_text(
                    out, A=left_rest, B=base, C=right_rest)
            )
            return out if ok else None
        except (MetricViolation, UryError) as exc:
            results["amalgam"].record(False, lambda: f"[{ctx}] amalgam failed: {exc}")
            return None

    for t in range(trials):
        rng = random.Random(seed * 1_000_003 + t)
        den = rng.choice(dens)

        # symmetry: verdict and failing pairs mirror under swapping A and C
        n = rng.randint(3, max(3, min(6, max_points)))
        space = sampling.random_space(rng, n, den)
        pts = list(space.points)
        rng.shuffle(pts)
        a_n = rng.randint(1, 2)
        c_n = rng.randint(1, 2)
        b_n = rng.choice((0, 1, 1, 2))
        A, C = pts[:a_n], pts[a_n:a_n + c_n]
        B = pts[a_n + c_n:a_n + c_n + b_n]
        fwd = independence_failures(space, A, B, C)
        bwd = independence_failures(space, C, B, A)
        results["symmetry"].record(
            {(a, c) for a, c in fwd} == {(a, c) for c, a in bwd},
            lambda: _query_text(space, A=A, B=B, C=C),
        )

        # monotonicity: A ind_B CD implies A ind_B C and A ind_{BC} D
        base = sampling.random_space(rng, rng.randint(1, 2), den, prefix="b")
        left = sampling.random_extension(
            rng, base, [f"a{i}" for i in range(rng.randint(1, 2))], den)
        cd_c = [f"c{i}" for i in range(rng.randint(1, 2))]
        cd_d = [f"d{i}" for i in range(rng.randint(1, 2))]
        right = sampling.random_extension(rng, base, cd_c + cd_d, den)
        A_m = [p for p in left.points if p not in base.points]
        amal = checked_amalgam(left, right, base.points, "monotonicity")
        if amal is not None:
            ok = (
                is_independent(amal, A_m, base.points, cd_c + cd_d)
                and is_independent(amal, A_m, base.points, cd_c)
                and is_independent(amal, A_m, tuple(base.points) + tuple(cd_c), cd_d)
            )
            results["monotonicity"].record(
                ok, lambda: _query_text(amal, A=A_m, B=base.points, C=cd_c, D=cd_d))

        # transitivity: A ind_B C and A ind_{BC} D imply A ind_B CD
        mid = sampling.random_extension(rng, base, cd_c, den)
        stage1 = checked_amalgam(left, mid, base.points, "transitivity")
        if stage1 is not None:
            bc = tuple(base.points) + tuple(cd_c)
            tail = sampling.random_extension(rng, stage1.restrict(bc), cd_d, den)
            stage2 = checked_amalgam(stage1, tail, bc, "transitivity")
            if stage2 is not None:
                premises = (
                    is_independent(stage2, A_m, base.points, cd_c)
                    and is_independent(stage2, A_m, bc, cd_d)
                )
                conclusion = is_independent(stage2, A_m, base.points, cd_c + cd_d)
                results["transitivity"].record(
                    (not premises) or conclusion,
                    lambda: _query_text(stage2, A=A_m, B=base.points, C=cd_c, D=cd_d),
                )

        # existence: the canonical realization is independent from everything
        n2 = rng.randint(2, max(2, max_points))
        space2 = sampling.random_space(rng, n2, den)
        x_n = rng.randint(1, n2)
        X = list(space2.points[:x_n])
        p = sampling.random_profile(rng, space2.restrict(X), den)
        f = canonical_extension(p, space2)
        extended, label = extend_with_point(space2, f, "r#exist")
        results["existence"].record(
            is_independent(extended, (label,), X, space2.points),
            lambda: _query_text(extended, realization=[label], X=X, C=space2.points),
        )

        # stationarity: grid enumeration leaves exactly the canonical extension
        n3 = rng.randint(2, max(2, min(5, max_points)))
        m = rng.randint(1, min(2, n3 - 1)) if n3 > 1 else 1
        space3 = sampling.random_space(rng, n3, den, prefix="s")
        X3 = list(space3.points[: n3 - m])
        p3 = sampling.random_profile(rng, space3.restrict(X3), den)
        canon = canonical_extension(p3, space3)
        survivors = independent_extensions(space3, X3, p3, den)
        results["stationarity"].record(
            len(survivors) == 1 and survivors[0] == dict(canon.values),
            lambda: _query_text(space3, X=X3) + f"\nsurvivors = {len(survivors)}",
        )

    report = SirReport(seed=seed, trials=trials)
    report.results = list(results.values())
    return report


def uniqueness_battery(
    instances: int = 120,
    seed: int = 0,
    max_points: int = 6,
    max_den: int = 12,
    max_outside: int = 3,
) -> tuple[int, list[str]]:
    """Exhaustive per-instance uniqueness oracle on small random instances.

    For each instance the full grid of admissible extensions is enumerated
    and the canonical extension must be the unique independent one.
    """
    dens = [q for q in (2, 3, 4, 6, 8, 12) if q <= max_den] or [2]
    failures: list[str] = []
    for t in range(instances):
        rng = random.Random(seed * 7_368_787 + t)
        den = rng.choice(dens)
        n = rng.randint(2, max_points)
        m = rng.randint(1, min(max_outside, n - 1))
        space = sampling.random_space(rng, n, den, prefix="u")
        X = list(space.points[: n - m])
        p = sampling.random_profile(rng, space.restrict(X), den)
        canon = canonical_extension(p, space)
        survivors = independent_extensions(space, X, p, den)
        if len(survivors) != 1 or survivors[0] != dict(canon.values):
            failures.append(
                f"instance {t}: {len(survivors)} survivors\n"
                + _query_text(space, X=X)
            )
    return instances, failures
