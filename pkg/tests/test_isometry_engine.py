import random
from fractions import Fraction

import pytest

from urysphere import sampling
from urysphere.errors import IsometryViolation, MalformedInput
from urysphere.independence import is_independent
from urysphere.isometry_engine import (
    Commutator,
    FreeStrategy,
    IdentityStrategy,
    LazyIsometry,
    Leaf,
    PartialIsometry,
    PlainStrategy,
    Universe,
    commutator,
    compose,
    conjugate,
    conjugate_letters,
    evaluate_word,
    expand_commutator_word,
    flatten_word,
    inverse,
    isometry_from_dump,
    mover_oracle,
    move_type,
    word_from_object,
    word_to_object,
)
from urysphere.metric_core import KatetovFunction, validate_space

from conftest import fr


def fresh_universe(seed=0, n=4, den=8):
    rng = random.Random(seed)
    return Universe(sampling.random_space(rng, n, den))


class TestPartialIsometry:
    def test_valid_table(self, two_point):
        iso = PartialIsometry(two_point, ((("a"), ("a")),))
        assert iso.apply("a") == "a"

    def test_distance_preservation_enforced(self):
        s = validate_space(
            ["a", "b", "c"],
            [[0, "1/2", "1/2"], ["1/2", 0, "1/4"], ["1/2", "1/4", 0]],
        )
        # a|->b, b|->c needs d(a,b) = d(b,c), but 1/2 != 1/4
        with pytest.raises(IsometryViolation):
            PartialIsometry(s, (("a", "b"), ("b", "c")))

    def test_injectivity_enforced(self, two_point):
        with pytest.raises(IsometryViolation):
            PartialIsometry(two_point, (("a", "b"), ("b", "b")))


class TestEvaluate:
    def test_table_lookup_no_growth(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", FreeStrategy(), initial=[("a", "b")])
        size = len(u.space)
        assert g.evaluate("a") == "b"
        assert len(u.space) == size

    def test_identity_strategy(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", IdentityStrategy())
        assert g.evaluate("a") == "a"
        assert g.evaluate_inverse("b") == "b"

    def test_free_first_image_at_distance_one(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", FreeStrategy())
        image = g.evaluate("a")
        assert u.dist("a", image) == 1
        assert u.dist("b", image) == 1

    def test_transported_profile_realized_exactly(self):
        u = fresh_universe(seed=3, n=5)
        g = LazyIsometry(u, "g", FreeStrategy())
        x0 = u.space.points[0]
        x1 = u.space.points[1]
        g.evaluate(x0)
        y1 = g.evaluate(x1)
        assert u.dist(g.evaluate(x0), y1) == u.dist(x0, x1)
        g.verify_table()

    def test_inverse_round_trip(self):
        u = fresh_universe(seed=4)
        g = LazyIsometry(u, "g", FreeStrategy())
        x = u.space.points[0]
        assert g.evaluate_inverse(g.evaluate(x)) == x
        y = u.space.points[1]
        assert g.evaluate(g.evaluate_inverse(y)) == y

    def test_unknown_point_rejected(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", FreeStrategy())
        with pytest.raises(MalformedInput):
            g.evaluate("zz")

    def test_determinism_same_seed_same_tables(self):
        outs = []
        for _ in range(2):
            u = fresh_universe(seed=9, n=4)
            g = LazyIsometry(u, "g", PlainStrategy(), seed=17)
            for x in list(u.space.points):
                g.evaluate(x)
            outs.append((g.pairs(), u.space.points))
        assert outs[0] == outs[1]

    def test_plain_strategy_profiles_validate(self):
        u = fresh_universe(seed=12, n=4, den=6)
        g = LazyIsometry(u, "g", PlainStrategy(), seed=5)
        for x in list(u.space.points):
            g.evaluate(x)
        g.verify_table()
        validate_space(u.space.points, u.space.rows)

    def test_forced_pair_must_be_isometric(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", FreeStrategy())
        g.add_pair("a", "a")
        with pytest.raises(IsometryViolation):
            g.add_pair("b", "a")


class TestIndependenceInvariance:
    def test_images_of_independent_triples_independent(self):
        for seed in range(6):
            u = fresh_universe(seed=seed, n=6, den=8)
            g = LazyIsometry(u, "g", FreeStrategy())
            pts = list(u.space.points)
            for x in pts:
                g.evaluate(x)
            A, B, C = [pts[0]], [pts[1], pts[2]], [pts[3]]
            table = dict(g.pairs())
            before = is_independent(u.space, A, B, C)
            after = is_independent(
                u.space, [table[a] for a in A], [table[b] for b in B],
                [table[c] for c in C])
            assert before == after


class TestMoveType:
    def test_identity_gives_zero_displacement(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", IdentityStrategy())
        p = KatetovFunction(u.space.restrict(["a"]), {"a": fr("1/2")})
        out = move_type(g, p)
        assert out.kind == "displacement" and out.displacement == 0

    def test_free_mode_moves_almost_maximally(self):
        for seed in range(8):
            u = fresh_universe(seed=seed, n=4, den=8)
            g = LazyIsometry(u, "g", FreeStrategy())
            rng = random.Random(seed + 100)
            for _ in range(3):
                base = rng.sample(list(u.space.points), 2)
                p = sampling.random_profile(rng, u.space.restrict(base), 8)
                out = move_type(g, p)
                assert out.almost_maximal
                assert out.meets("almost_max")

    def test_oracle_wrapper(self):
        u = fresh_universe(seed=2)
        g = LazyIsometry(u, "g", FreeStrategy())
        p = KatetovFunction(
            u.space.restrict([u.space.points[0]]), {u.space.points[0]: fr("1/2")})
        out = mover_oracle(g)(p)
        assert out.realization in u.space.points


class TestWords:
    def test_convention_conjugate_moves_translated_points(self):
        # g^h(h(a)) = h(g(a)) pins the convention g^h = h g h^-1
        u = fresh_universe(seed=5)
        g = LazyIsometry(u, "g", FreeStrategy())
        h = LazyIsometry(u, "h", FreeStrategy())
        a = u.space.points[0]
        ha = h.evaluate(a)
        ga = g.evaluate(a)
        hga = h.evaluate(ga)
        got = evaluate_word(u, conjugate(Leaf("g"), Leaf("h")), ha)
        assert got == hga

    def test_commutator_with_identity_is_identity(self, two_point):
        u = Universe(two_point)
        g = LazyIsometry(u, "g", FreeStrategy())
        e = LazyIsometry(u, "e", IdentityStrategy())
        word = commutator(Leaf("g"), Leaf("e"))
        assert evaluate_word(u, word, "a") == "a"

    def test_inverse_word_undoes(self):
        u = fresh_universe(seed=6)
        g = LazyIsometry(u, "g", FreeStrategy())
        h = LazyIsometry(u, "h", FreeStrategy())
        word = compose(Leaf("g"), Leaf("h"))
        x = u.space.points[0]
        y = evaluate_word(u, word, x)
        assert evaluate_word(u, inverse(word), y) == x

    def test_compose_is_associative_on_points(self):
        u = fresh_universe(seed=7)
        for name in ("g", "h", "k"):
            LazyIsometry(u, name, FreeStrategy())
        x = u.space.points[0]
        left = compose(compose(Leaf("g"), Leaf("h")), Leaf("k"))
        right = compose(Leaf("g"), compose(Leaf("h"), Leaf("k")))
        assert evaluate_word(u, left, x) == evaluate_word(u, right, x)

    def test_flatten_commutator_order(self):
        flat = flatten_word(Commutator(Leaf("g"), Leaf("h")))
        assert flat == (("h", False), ("g", False), ("h", True), ("g", True))

    def test_word_serialization_round_trip(self):
        word = commutator(conjugate(Leaf("g"), Leaf("h")), inverse(Leaf("k")))
        again = word_from_object(word_to_object(word))
        assert flatten_word(again) == flatten_word(word)


class TestConjugateLetters:
    def test_depth_zero_single_letter(self):
        word, letters = expand_commutator_word(0)
        assert len(letters) == 1

    def test_commutator_two_letters(self):
        letters = conjugate_letters(Commutator(Leaf("g"), Leaf("h")))
        assert len(letters) == 2
        assert sorted(s for s, _ in letters) == [-1, 1]

    def test_depth_five_thirty_two(self):
        word, letters = expand_commutator_word(5)
        assert len(letters) == 32
        assert sum(s for s, _ in letters) == 0

    def test_depth_times_external_factor(self):
        _, letters = expand_commutator_word(5)
        assert len(letters) * 2 ** 4 == 512

    def test_counts_double_per_level(self):
        for depth in range(7):
            _, letters = expand_commutator_word(depth)
            assert len(letters) == 2 ** depth


class TestDump:
    def test_dump_round_trip(self):
        u = fresh_universe(seed=8)
        g = LazyIsometry(u, "g", PlainStrategy(), seed=3)
        g.evaluate(u.space.points[0])
        g.evaluate_inverse(u.space.points[1])
        blob = g.dump()
        u2, g2 = isometry_from_dump(blob)
        assert g2.pairs() == g.pairs()
        assert u2.space.points == u.space.points
        assert g2.strategy.kind == "plain"
