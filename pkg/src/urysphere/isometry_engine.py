"""Lazily-extended isometries of a growing exact metric space.

A :class:`LazyIsometry` answers point queries on demand: an unseen point is
assigned an image whose profile over the current range is exactly the
transported profile over the current domain, positioned in the ambient by a
pluggable strategy.  Tables are append-only, so an isometry never changes an
earlier answer, and the whole table is re-verified exactly after every
extension.  Words (inverse, composition, conjugation, commutator) evaluate
by delegating letter by letter, recording a replayable trace.

Conventions, fixed once and used everywhere: conjugation g^h = h o g o h^-1
(so g^h maps h(a) to h(g(a))) and commutator [g,h] = g^-1 o h^-1 o g o h.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    IsometryViolation,
    LabelCollision,
    MalformedInput,
    ParseError,
    StrategyExhausted,
)
from .independence import amalgamate, canonical_extension, independence_failures, is_independent
from .metric_core import (
    ONE,
    ZERO,
    FiniteMetricSpace,
    KatetovFunction,
    format_rational,
    parse_rational,
    space_from_object,
    space_to_object,
)


@dataclass(frozen=True)
class PartialIsometry:
    """A finite distance-preserving bijection between subsets of one space."""

    space: FiniteMetricSpace
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        violations = isometry_violations(self.space, self.pairs)
        if violations:
            raise IsometryViolation(violations)

    def mapping(self) -> dict[str, str]:
        return dict(self.pairs)

    def domain(self) -> tuple[str, ...]:
        return tuple(u for u, _ in self.pairs)

    def image(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.pairs)

    def apply(self, x: str) -> str:
        for u, v in self.pairs:
            if u == x:
                return v
        raise MalformedInput(f"{x!r} not in domain")


def isometry_violations(
    space: FiniteMetricSpace, pairs: Sequence[tuple[str, str]]
) -> list[str]:
    """Exact check of injectivity and distance preservation for a table."""
    out: list[str] = []
    seen_u: dict[str, str] = {}
    seen_v: dict[str, str] = {}
    for u, v in pairs:
        if u not in space or v not in space:
            out.append(f"pair ({u!r},{v!r}) off the space")
            continue
        if u in seen_u and seen_u[u] != v:
            out.append(f"domain point {u!r} mapped twice")
        if v in seen_v and seen_v[v] != u:
            out.append(f"range point {v!r} hit twice")
        seen_u[u] = v
        seen_v[v] = u
    table = list(seen_u.items())
    for (u1, v1), (u2, v2) in itertools.combinations(table, 2):
        d_dom = space.dist(u1, u2)
        d_ran = space.dist(v1, v2)
        if d_dom != d_ran:
            out.append(
                f"d({u1},{u2}) = {d_dom} but d({v1},{v2}) = {d_ran}"
            )
    return out


class Universe:
    """A growable exact metric space shared by several isometries.

    Points are only ever added, never moved or removed, so distances between
    existing points are stable for the lifetime of the universe.
    """

    def __init__(self, space: FiniteMetricSpace):
        self._space = space
        self._counters: dict[str, int] = {}
        self._isometries: dict[str, "LazyIsometry"] = {}

    @property
    def space(self) -> FiniteMetricSpace:
        return self._space

    def dist(self, x: str, y: str) -> Fraction:
        return self._space.dist(x, y)

    def fresh_label(self, prefix: str) -> str:
        while True:
            self._counters[prefix] = self._counters.get(prefix, 0) + 1
            label = f"{prefix}#{self._counters[prefix]}"
            if label not in self._space:
                return label

    def fresh_isometry_name(self, base: str) -> str:
        if base not in self._isometries:
            return base
        for i in itertools.count(2):
            name = f"{base}_{i}"
            if name not in self._isometries:
                return name
        raise AssertionError("unreachable")

    def register(self, iso: "LazyIsometry") -> None:
        if iso.name in self._isometries:
            raise LabelCollision(f"isometry name {iso.name!r} already registered")
        self._isometries[iso.name] = iso

    def isometry(self, name: str) -> "LazyIsometry":
        try:
            return self._isometries[name]
        except KeyError:
            raise MalformedInput(f"unknown isometry {name!r}") from None

    def isometry_names(self) -> tuple[str, ...]:
        return tuple(self._isometries)

    def add_point(self, profile: KatetovFunction | Mapping[str, Fraction],
                  label: str | None = None, prefix: str = "t") -> str:
        """Realize a full-ambient profile; a zero reuses the existing point."""
        if not isinstance(profile, KatetovFunction):
            profile = KatetovFunction(self._space, dict(profile))
        if profile.base != self._space:
            raise MalformedInput("profile is not over the current ambient")
        zero = profile.zero_point()
        if zero is not None:
            return zero
        if label is None:
            label = self.fresh_label(prefix)
        self._space = self._space.extended(label, profile.values)
        return label

    def realize(self, p: KatetovFunction, label: str | None = None,
                prefix: str = "t") -> str:
        """Realize a profile over a subspace canonically over the ambient."""
        return self.add_point(canonical_extension(p, self._space), label, prefix)

    def extend_by_amalgam(self, other: FiniteMetricSpace, base: Sequence[str]) -> None:
        """Graft a space sharing ``base`` onto the ambient via the free amalgam."""
        self._space = amalgamate(self._space, other, base)


# ---------------------------------------------------------------------------
# Extension strategies.


class FreeStrategy:
    """Canonical placement: the image is independent from everything already
    known over the current range.  The default generic automorphism."""

    kind = "free"

    def choose(self, universe: Universe, transported: Mapping[str, Fraction],
               rng: random.Random) -> KatetovFunction:
        space = universe.space
        if not transported:
            return KatetovFunction(space, {w: ONE for w in space.points})
        base = space.restrict(tuple(transported))
        return canonical_extension(KatetovFunction(base, dict(transported)), space)


class PlainStrategy:
    """Smallest-denominator admissible placement with a seeded tie-break."""

    kind = "plain"

    def choose(self, universe: Universe, transported: Mapping[str, Fraction],
               rng: random.Random) -> KatetovFunction:
        space = universe.space
        values = dict(transported)
        for w in space.points:
            if w in values:
                continue
            lo, hi = ZERO, ONE
            for u, v in values.items():
                d = space.dist(u, w)
                lo = max(lo, abs(v - d))
                hi = min(hi, v + d)
            if lo > hi:
                raise StrategyExhausted(f"empty interval for {w!r}")
            values[w] = _simplest_choice(lo, hi, rng, exclude_zero=True)
        return KatetovFunction(space, values)


class IdentityStrategy:
    """Every queried point is its own image."""

    kind = "identity"

    def choose(self, universe: Universe, transported: Mapping[str, Fraction],
               rng: random.Random) -> KatetovFunction:
        raise AssertionError("identity strategy resolves before profile choice")


def _simplest_choice(lo: Fraction, hi: Fraction, rng: random.Random,
                     exclude_zero: bool = False) -> Fraction:
    """Smallest-denominator rational in [lo, hi]; ties broken by the rng."""
    if lo > hi or (exclude_zero and hi == ZERO):
        raise StrategyExhausted(f"no admissible value in [{lo}, {hi}]")
    q = 1
    while True:
        k_lo = -((-lo.numerator * q) // lo.denominator)
        k_hi = (hi.numerator * q) // hi.denominator
        candidates = [Fraction(k, q) for k in range(k_lo, k_hi + 1)]
        if exclude_zero:
            candidates = [c for c in candidates if c != ZERO]
        if candidates:
            return rng.choice(candidates)
        q += 1


def strategy_by_kind(kind: str) -> "FreeStrategy | PlainStrategy | IdentityStrategy":
    table = {"free": FreeStrategy, "plain": PlainStrategy, "identity": IdentityStrategy}
    try:
        return table[kind]()
    except KeyError:
        raise MalformedInput(f"unknown strategy kind {kind!r}") from None


def generic_strategy(mode: str = "free", seed: int = 0):
    """Strategy factory; ``free`` realizes images canonically, ``plain``
    picks the simplest admissible profile under a seeded tie-break."""
    if mode not in ("free", "plain"):
        raise MalformedInput(f"unknown generic mode {mode!r}")
    return strategy_by_kind(mode)


# ---------------------------------------------------------------------------
# Lazy isometries.


class LazyIsometry:
    """Single-owner mutable isometry table over a shared universe.

    Answers are deterministic given (strategy, seed, query order); the table
    only grows and is exactly re-verified after every extension.
    """

    def __init__(self, universe: Universe, name: str, strategy=None, seed: int = 0,
                 initial: Iterable[tuple[str, str]] = ()):  # noqa: ANN001
        self.universe = universe
        self.name = name
        self.strategy = strategy or FreeStrategy()
        self.seed = seed
        self._rng = random.Random(seed)
        self._fwd: dict[str, str] = {}
        self._bwd: dict[str, str] = {}
        self.trace: list[dict] = []
        universe.register(self)
        for u, v in initial:
            self.add_pair(u, v, kind="initial")

    # -- bookkeeping

    def domain(self) -> tuple[str, ...]:
        return tuple(self._fwd)

    def image(self) -> tuple[str, ...]:
        return tuple(self._bwd)

    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._fwd.items())

    def partial(self) -> PartialIsometry:
        return PartialIsometry(self.universe.space, self.pairs())

    def verify_table(self) -> None:
        violations = isometry_violations(self.universe.space, self.pairs())
        if violations:
            raise IsometryViolation(
                [f"isometry {self.name!r} corrupt after extension"] + violations
            )

    def _install(self, x: str, y: str, kind: str) -> None:
        self._fwd[x] = y
        self._bwd[y] = x
        self.trace.append({"kind": kind, "point": x, "image": y})
        self.verify_table()

    def add_pair(self, x: str, y: str, kind: str = "pair") -> None:
        """Force a mapping; must be exactly consistent with the table."""
        if x in self._fwd:
            if self._fwd[x] == y:
                return
            raise IsometryViolation([f"{x!r} already maps to {self._fwd[x]!r}"])
        if y in self._bwd:
            raise IsometryViolation([f"{y!r} already an image"])
        if x not in self.universe.space or y not in self.universe.space:
            raise MalformedInput(f"pair ({x!r},{y!r}) off the ambient")
        self._install(x, y, kind)

    # -- evaluation

    def evaluate(self, x: str) -> str:
        """g(x); extends the table through the strategy when x is unseen."""
        if x not in self.universe.space:
            raise MalformedInput(f"point {x!r} not in ambient")
        if x in self._fwd:
            return self._fwd[x]
        if isinstance(self.strategy, IdentityStrategy):
            if x in self._bwd:
                raise StrategyExhausted(f"identity collides at {x!r}")
            self._install(x, x, "fwd")
            return x
        transported = {self._fwd[u]: self.universe.dist(x, u) for u in self._fwd}
        image = self._place(transported, x, "fwd")
        self._install(x, image, "fwd")
        return image

    def evaluate_inverse(self, y: str) -> str:
        """g^-1(y); grows the table backwards with the same guarantees."""
        if y not in self.universe.space:
            raise MalformedInput(f"point {y!r} not in ambient")
        if y in self._bwd:
            return self._bwd[y]
        if isinstance(self.strategy, IdentityStrategy):
            if y in self._fwd:
                raise StrategyExhausted(f"identity collides at {y!r}")
            self._install(y, y, "bwd")
            return y
        transported = {u: self.universe.dist(y, self._fwd[u]) for u in self._fwd}
        preimage = self._place(transported, y, "bwd")
        self._install(preimage, y, "bwd")
        return preimage

    def _place(self, transported: Mapping[str, Fraction], queried: str,
               direction: str) -> str:
        profile = self.strategy.choose(self.universe, transported, self._rng)
        for anchor, required in transported.items():
            if profile[anchor] != required:
                raise StrategyExhausted(
                    f"{self.name}: profile misses anchor {anchor!r} "
                    f"({profile[anchor]} != {required})"
                )
        taken = self._bwd if direction == "fwd" else self._fwd
        zero = profile.zero_point()
        if zero is not None and zero in taken:
            raise StrategyExhausted(f"{self.name}: reuse of {zero!r} breaks injectivity")
        label = self.universe.add_point(profile, prefix=f"{self.name}.w")
        return label

    # -- serialization

    def dump(self) -> dict:
        return {
            "name": self.name,
            "strategy": self.strategy.kind,
            "seed": self.seed,
            "ambient": space_to_object(self.universe.space),
            "map": [[u, v] for u, v in self._fwd.items()],
            "trace": list(self.trace),
        }


def isometry_from_dump(obj: dict) -> tuple[Universe, LazyIsometry]:
    """Rebuild a universe plus isometry from :meth:`LazyIsometry.dump`."""
    if not isinstance(obj, dict):
        raise ParseError("isometry dump must be an object")
    for key in ("name", "strategy", "seed", "ambient", "map"):
        if key not in obj:
            raise ParseError(f"isometry dump missing field {key!r}")
    universe = Universe(space_from_object(obj["ambient"], "ambient"))
    pairs = [(u, v) for u, v in obj["map"]]
    iso = LazyIsometry(
        universe, obj["name"], strategy_by_kind(obj["strategy"]),
        seed=int(obj["seed"]), initial=pairs,
    )
    return universe, iso


# ---------------------------------------------------------------------------
# Type moving.


@dataclass(frozen=True)
class MoveOutcome:
    """Classified result of moving one type: realization, image, and whether
    the realization is independent from its image over the base."""

    realization: str
    image: str
    base: tuple[str, ...]
    displacement: Fraction
    almost_maximal: bool

    @property
    def kind(self) -> str:
        return "almost_maximal" if self.almost_maximal else "displacement"

    def meets(self, want) -> bool:
        if want is None:
            return True
        if want == "almost_max":
            return self.almost_maximal
        return self.almost_maximal or self.displacement >= Fraction(want)


def move_type(g: LazyIsometry, p: KatetovFunction, want=None) -> MoveOutcome:
    """Realize ``p`` independently from the base and its g-preimage, evaluate
    g there, and classify the outcome exactly.

    The realization is the canonical extension of ``p`` over the full
    ambient after g^-1 has been evaluated on the base, matching how movers
    are consumed by the witness constructions.
    """
    X = p.base.points
    for x in X:
        g.evaluate_inverse(x)
    realization = g.universe.realize(p, prefix="t")
    image = g.evaluate(realization)
    displacement = g.universe.dist(realization, image)
    almost = is_independent(g.universe.space, (realization,), X, (image,))
    return MoveOutcome(realization, image, X, displacement, almost)


def mover_oracle(g: LazyIsometry):
    """The mover interface of ``g``: a callable type -> MoveOutcome."""
    return lambda p: move_type(g, p)


def pessimistic_oracle(g: LazyIsometry):
    """Like :func:`mover_oracle` but never claims almost-maximality; it
    reports the exact displacement instead (legitimately weaker)."""

    def run(p: KatetovFunction) -> MoveOutcome:
        out = move_type(g, p)
        return MoveOutcome(out.realization, out.image, out.base,
                           out.displacement, False)

    return run


# ---------------------------------------------------------------------------
# Words.


@dataclass(frozen=True)
class Leaf:
    name: str


@dataclass(frozen=True)
class Inverse:
    inner: "IsometryWord"


@dataclass(frozen=True)
class Compose:
    """left o right: ``right`` is applied first."""

    left: "IsometryWord"
    right: "IsometryWord"


@dataclass(frozen=True)
class Conjugate:
    """inner^by = by o inner o by^-1."""

    inner: "IsometryWord"
    by: "IsometryWord"


@dataclass(frozen=True)
class Commutator:
    """[left, right] = left^-1 o right^-1 o left o right."""

    left: "IsometryWord"
    right: "IsometryWord"


IsometryWord = Leaf | Inverse | Compose | Conjugate | Commutator


def inverse(w: IsometryWord) -> IsometryWord:
    return Inverse(w)


def compose(*words: IsometryWord) -> IsometryWord:
    if not words:
        raise MalformedInput("compose needs at least one word")
    out = words[0]
    for w in words[1:]:
        out = Compose(out, w)
    return out


def conjugate(w: IsometryWord, by: IsometryWord) -> IsometryWord:
    return Conjugate(w, by)


def commutator(left: IsometryWord, right: IsometryWord) -> IsometryWord:
    return Commutator(left, right)


def flatten_word(w: IsometryWord) -> tuple[tuple[str, bool], ...]:
    """Application order of the letters: (isometry name, inverted) pairs."""
    if isinstance(w, Leaf):
        return ((w.name, False),)
    if isinstance(w, Inverse):
        return tuple((n, not inv) for n, inv in reversed(flatten_word(w.inner)))
    if isinstance(w, Compose):
        return flatten_word(w.right) + flatten_word(w.left)
    if isinstance(w, Conjugate):
        by = flatten_word(w.by)
        by_inv = tuple((n, not inv) for n, inv in reversed(by))
        return by_inv + flatten_word(w.inner) + by
    if isinstance(w, Commutator):
        return (
            flatten_word(w.right)
            + flatten_word(w.left)
            + flatten_word(Inverse(w.right))
            + flatten_word(Inverse(w.left))
        )
    raise MalformedInput(f"not a word: {w!r}")


def evaluate_word(universe: Universe, w: IsometryWord, x: str,
                  trace: list[dict] | None = None) -> str:
    """Apply a word to a point, delegating letter by letter."""
    current = x
    for name, inv in flatten_word(w):
        iso = universe.isometry(name)
        nxt = iso.evaluate_inverse(current) if inv else iso.evaluate(current)
        if trace is not None:
            trace.append({
                "op": "apply_inv" if inv else "apply",
                "iso": name, "in": current, "out": nxt,
            })
        current = nxt
    return current


def word_to_object(w: IsometryWord) -> dict:
    if isinstance(w, Leaf):
        return {"op": "leaf", "name": w.name}
    if isinstance(w, Inverse):
        return {"op": "inv", "of": word_to_object(w.inner)}
    if isinstance(w, Compose):
        return {"op": "comp", "left": word_to_object(w.left),
                "right": word_to_object(w.right)}
    if isinstance(w, Conjugate):
        return {"op": "conj", "of": word_to_object(w.inner),
                "by": word_to_object(w.by)}
    if isinstance(w, Commutator):
        return {"op": "comm", "left": word_to_object(w.left),
                "right": word_to_object(w.right)}
    raise MalformedInput(f"not a word: {w!r}")


def word_from_object(obj) -> IsometryWord:
    if not isinstance(obj, dict) or "op" not in obj:
        raise ParseError("word node must be an object with an 'op' field")
    op = obj["op"]
    try:
        if op == "leaf":
            return Leaf(str(obj["name"]))
        if op == "inv":
            return Inverse(word_from_object(obj["of"]))
        if op == "comp":
            return Compose(word_from_object(obj["left"]), word_from_object(obj["right"]))
        if op == "conj":
            return Conjugate(word_from_object(obj["of"]), word_from_object(obj["by"]))
        if op == "comm":
            return Commutator(word_from_object(obj["left"]), word_from_object(obj["right"]))
    except KeyError as exc:
        raise ParseError(f"word node {op!r} missing field {exc}") from None
    raise ParseError(f"unknown word op {op!r}")


# ---------------------------------------------------------------------------
# Conjugate-letter expansion.


def product_tokens(w: IsometryWord) -> tuple[tuple[str, bool], ...]:
    """Letters of a word in product (left-to-right multiplication) order."""
    if isinstance(w, Leaf):
        return ((w.name, False),)
    if isinstance(w, Inverse):
        return tuple((n, not inv) for n, inv in reversed(product_tokens(w.inner)))
    if isinstance(w, Compose):
        return product_tokens(w.left) + product_tokens(w.right)
    if isinstance(w, Conjugate):
        by = product_tokens(w.by)
        by_inv = tuple((n, not inv) for n, inv in reversed(by))
        return by + product_tokens(w.inner) + by_inv
    if isinstance(w, Commutator):
        return product_tokens(
            Compose(Inverse(w.left), Conjugate(w.left, Inverse(w.right)))
        )
    raise MalformedInput(f"not a word: {w!r}")


def conjugate_letters(w: IsometryWord) -> list[tuple[int, tuple[tuple[str, bool], ...]]]:
    """Expansion into conjugates of the innermost generator and its inverse.

    Each letter is (sign, conjugator tokens); nesting commutators with fresh
    conjugators doubles the letter count per level.
    """
    if isinstance(w, Leaf):
        return [(1, ())]
    if isinstance(w, Inverse):
        return [(-s, c) for s, c in reversed(conjugate_letters(w.inner))]
    if isinstance(w, Compose):
        return conjugate_letters(w.left) + conjugate_letters(w.right)
    if isinstance(w, Conjugate):
        pre = product_tokens(w.by)
        return [(s, pre + c) for s, c in conjugate_letters(w.inner)]
    if isinstance(w, Commutator):
        return conjugate_letters(
            Compose(Inverse(w.left), Conjugate(w.left, Inverse(w.right)))
        )
    raise MalformedInput(f"not a word: {w!r}")


def expand_commutator_word(depth: int, generator: str = "g",
                           conjugator_prefix: str = "h"):
    """Nested commutator of the given depth with fresh conjugators, plus its
    expansion into exactly 2**depth conjugate letters with balanced signs."""
    if depth < 0:
        raise MalformedInput("depth must be nonnegative")
    word: IsometryWord = Leaf(generator)
    for i in range(1, depth + 1):
        word = Commutator(word, Leaf(f"{conjugator_prefix}{i}"))
    letters = conjugate_letters(word)
    assert len(letters) == 2 ** depth
    if depth >= 1:
        assert sum(s for s, _ in letters) == 0
    return word, letters
